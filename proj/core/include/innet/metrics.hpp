// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_METRICS_HPP_
#define INNET_METRICS_HPP_

#include <span>

#include "innet/model_ir.hpp"

namespace innet {

// Chance-corrected agreement. Two identical single-class sequences give 1.
double cohens_kappa(std::span<const ClassId> a, std::span<const ClassId> b);

struct Score {
  double accuracy = 0.0;
  // Unweighted mean of per-class F1 over classes seen in either sequence.
  double macro_f1 = 0.0;
};

Score score(std::span<const ClassId> preds, std::span<const ClassId> truth);

}  // namespace innet

#endif  // INNET_METRICS_HPP_
