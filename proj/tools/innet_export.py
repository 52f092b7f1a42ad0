#!/usr/bin/env python3
# Copyright 2026 The innet Authors
# SPDX-License-Identifier: Apache-2.0
"""Convert fitted scikit-learn estimators into innet model exchange files.

    innet_export.py export --model est.pkl --train-csv train.csv --out model.json \
        --value-bits 16 --scale-shift 16

The training CSV holds raw float features followed by an integer label. It
fixes the min-max scaling used to quantize features, so thresholds and
weights are rewritten in quantized units.
"""

import argparse
import json
import math
import pickle
import sys

import numpy as np

FORMAT_VERSION = 1


def read_csv(path):
    rows = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=_header_lines(path))
    return rows[:, :-1], rows[:, -1].astype(int)


def _header_lines(path):
    with open(path) as f:
        first = f.readline().strip()
    return 0 if first[:1].isdigit() or first[:1] in "-." else 1


class Scaler:
    def __init__(self, x, value_bits):
        self.min = x.min(axis=0)
        self.max = x.max(axis=0)
        span = self.max - self.min
        constant = np.flatnonzero(span == 0)
        if constant.size:
            raise ValueError(f"feature {constant[0]} is constant in the training data")
        self.span = span
        self.value_bits = value_bits
        self.top = (1 << value_bits) - 1

    def quantize(self, x):
        q = np.floor((x - self.min) / self.span * self.top)
        return np.clip(q, 0, self.top).astype(np.int64)

    def threshold(self, feature, t):
        # x <= t implies q(x) <= floor(q(t)); exact except where rounding
        # merges values on both sides of t into one level.
        q = math.floor((t - self.min[feature]) / self.span[feature] * self.top)
        return int(min(max(q, -1), self.top))


def export_tree(tree, scaler):
    # Leaf values index classes_, which export() requires to be 0..C-1.
    t = tree.tree_
    nodes = []
    for i in range(t.node_count):
        left, right = int(t.children_left[i]), int(t.children_right[i])
        if left == -1:
            nodes.append({"id": i, "label": int(np.argmax(t.value[i][0]))})
        else:
            f = int(t.feature[i])
            nodes.append({"id": i, "feature": f, "threshold": scaler.threshold(f, float(t.threshold[i])),
                          "left": left, "right": right})
    return {"root": 0, "nodes": nodes}


def export_svm(svc, scaler, value_bits):
    # The pipeline sees a feature as q / 2^W; the estimator saw
    # min + q / (2^W - 1) * span. Fold the affine map into w and b.
    ratio = (1 << value_bits) / ((1 << value_bits) - 1)
    hyperplanes = []
    n = len(svc.classes_)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for h, (a, b) in enumerate(pairs):
        w = svc.coef_[h]
        bias = float(svc.intercept_[h] + np.dot(w, scaler.min))
        weights = [float(wi * si * ratio) for wi, si in zip(w, scaler.span)]
        hyperplanes.append({"weights": weights, "bias": bias, "classes": [a, b]})
    return {"scheme": "ovo", "hyperplanes": hyperplanes}


def export(model, train_csv, value_bits, scale_shift, name=""):
    x, _ = read_csv(train_csv)
    scaler = Scaler(x, value_bits)
    classes = [int(c) for c in model.classes_]
    if classes != list(range(len(classes))):
        raise ValueError("labels must be 0..C-1")
    doc = {
        "format_version": FORMAT_VERSION,
        "class_count": len(classes),
        "quantization": {"feature_count": int(x.shape[1]), "value_bits": value_bits,
                         "scale_shift": scale_shift, "acc_bits": 32, "mul_index_bits": 10},
    }
    if name:
        doc["name"] = name
    kind = type(model).__name__
    if kind == "DecisionTreeClassifier":
        doc["model_type"] = "dt"
        doc["tree"] = export_tree(model, scaler)
    elif kind == "RandomForestClassifier":
        doc["model_type"] = "rf"
        doc["trees"] = [export_tree(t, scaler) for t in model.estimators_]
    elif kind == "SVC":
        if model.kernel != "linear":
            raise ValueError("only linear SVC models are supported")
        doc["model_type"] = "svm"
        doc["svm"] = export_svm(model, scaler, value_bits)
    else:
        raise ValueError(f"unsupported estimator {kind}")
    return doc, scaler


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("export", help="pickled estimator -> model exchange file")
    ex.add_argument("--model", required=True)
    ex.add_argument("--train-csv", required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--value-bits", type=int, default=16)
    ex.add_argument("--scale-shift", type=int, default=16)
    ex.add_argument("--name", default="")
    args = parser.parse_args(argv)

    with open(args.model, "rb") as f:
        model = pickle.load(f)
    try:
        doc, _ = export(model, args.train_csv, args.value_bits, args.scale_shift, args.name)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
