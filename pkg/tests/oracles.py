"""Slow, direct reference implementations of the evaluation metrics.

None of these go through a confusion matrix; they work on raw label and
prediction vectors so that a shared bug cannot hide.
"""

import math

from balmix.errors import UndefinedMetricError


def mcc_cov(labels, preds, K):
    # multiclass MCC as cov(Y, P) / sqrt(cov(Y, Y) cov(P, P)) over one-hot rows
    n = len(labels)
    y = [[1.0 if labels[i] == k else 0.0 for k in range(K)] for i in range(n)]
    p = [[1.0 if preds[i] == k else 0.0 for k in range(K)] for i in range(n)]

    def cov(a, b):
        total = 0.0
        for k in range(K):
            ma = sum(r[k] for r in a) / n
            mb = sum(r[k] for r in b) / n
            total += sum((a[i][k] - ma) * (b[i][k] - mb) for i in range(n))
        return total

    vy, vp = cov(y, y), cov(p, p)
    if vy == 0 or vp == 0:
        return 0.0
    return cov(y, p) / math.sqrt(vy * vp)


def kendall_pairs(x, y):
    P = Q = tx = ty = 0
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = x[i] - x[j], y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif dx * dy > 0:
                P += 1
            else:
                Q += 1
    denom = math.sqrt((P + Q + tx) * (P + Q + ty))
    if denom == 0:
        raise UndefinedMetricError("constant ranking")
    return (P - Q) / denom


def kappa_pairs(labels, preds, K):
    # 1 - mean squared disagreement / mean squared disagreement under independence
    n = len(labels)
    observed = sum((labels[i] - preds[i]) ** 2 for i in range(n)) / n
    chance = sum((a - b) ** 2 for a in labels for b in preds) / (n * n)
    if chance == 0:
        raise UndefinedMetricError("no expected disagreement")
    return 1.0 - observed / chance


def balanced_acc_direct(labels, preds):
    recalls = []
    for k in sorted(set(labels)):
        members = [i for i in range(len(labels)) if labels[i] == k]
        recalls.append(sum(preds[i] == k for i in members) / len(members))
    return sum(recalls) / len(recalls)


def macro_f1_direct(labels, preds, K):
    scores = []
    for k in range(K):
        tp = sum(1 for a, b in zip(labels, preds) if a == k and b == k)
        fp = sum(1 for a, b in zip(labels, preds) if a != k and b == k)
        fn = sum(1 for a, b in zip(labels, preds) if a == k and b != k)
        scores.append(0.0 if tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn))
    return sum(scores) / K


def all_metrics(labels, preds, K):
    out = {
        "mcc": mcc_cov(labels, preds, K),
        "balanced_acc": balanced_acc_direct(labels, preds),
        "macro_f1": macro_f1_direct(labels, preds, K),
    }
    for name, f in (("quad_kappa", lambda: kappa_pairs(labels, preds, K)),
                    ("kendall_tau", lambda: kendall_pairs(labels, preds))):
        try:
            out[name] = f()
        except UndefinedMetricError:
            out[name] = None
    return out
