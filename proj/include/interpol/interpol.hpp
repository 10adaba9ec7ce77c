#pragma once

#include "interpol/adversary.hpp"
#include "interpol/field.hpp"
#include "interpol/multiparty.hpp"
#include "interpol/multivariate.hpp"
#include "interpol/op_counter.hpp"
#include "interpol/poly.hpp"
#include "interpol/protocol.hpp"
#include "interpol/random.hpp"
#include "interpol/reed_solomon.hpp"
#include "interpol/stats.hpp"
#include "interpol/harness/config.hpp"
#include "interpol/harness/experiment.hpp"
#include "interpol/harness/report.hpp"
