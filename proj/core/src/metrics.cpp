// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/metrics.hpp"

#include <map>
#include <set>
#include <string>

#include "innet/error.hpp"

namespace innet {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kLengthMismatch,
                "label sequences differ in length: " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) throw Error(ErrorCode::kLengthMismatch, "label sequences are empty");
}

}  // namespace

double cohens_kappa(std::span<const ClassId> a, std::span<const ClassId> b) {
  check_lengths(a.size(), b.size());
  const double n = static_cast<double>(a.size());
  std::map<ClassId, double> ca;
  std::map<ClassId, double> cb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    if (a[i] == b[i]) agree += 1;
  }
  const double po = agree / n;
  double pe = 0;
  for (const auto& [cls, count] : ca) {
    auto it = cb.find(cls);
    if (it != cb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

Score score(std::span<const ClassId> preds, std::span<const ClassId> truth) {
  check_lengths(preds.size(), truth.size());
  std::set<ClassId> classes(preds.begin(), preds.end());
  classes.insert(truth.begin(), truth.end());
  Score s;
  double correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == truth[i];
  s.accuracy = correct / static_cast<double>(preds.size());
  double f1_sum = 0;
  for (ClassId c : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == c && truth[i] == c) tp += 1;
      else if (preds[i] == c) fp += 1;
      else if (truth[i] == c) fn += 1;
    }
    const double denom = 2 * tp + fp + fn;
    f1_sum += denom > 0 ? 2 * tp / denom : 0.0;
  }
  s.macro_f1 = f1_sum / static_cast<double>(classes.size());
  return s;
}

}  // namespace innet
