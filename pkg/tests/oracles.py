"""Independent reference implementations the tests compare against.

Everything here is written as plainly as possible (frame-by-frame loops,
recursion, explicit counting) and deliberately avoids the package's own
code paths, so agreement between the two routes is evidence rather than
tautology. The finite-difference gradient check is the one exception: it
differentiates the package's loss numerically, which is the point.
"""

from __future__ import annotations


def naive_scan_events(row, threshold):
    """Frame-by-frame segmentation into maximal runs >= threshold."""
    events = []
    start = None
    for i, value in enumerate(row):
        if value >= threshold:
            if start is None:
                start = i
        else:
            if start is not None:
                events.append((start, i - 1))
                start = None
    if start is not None:
        events.append((start, len(row) - 1))
    return events


def brute_force_event_stats(pathology_row, start, end, threshold):
    """Max and covered fraction over an inclusive interval, by loop."""
    best = 0.0
    covered = 0
    length = 0
    for i in range(start, end + 1):
        value = pathology_row[i]
        if value > best:
            best = value
        if value >= threshold:
            covered += 1
        length += 1
    return best, covered / length


def reference_features(rows, event_threshold=0.5, pathology_threshold=0.5):
    """Straight-line recomputation of the 8 features from a 5-row raster.

    rows: any indexable of 5 sequences (inspiration, expiration, wheeze,
    crackle, noise). Returns the feature list in f1..f8 order.
    """
    out = []
    for pathology_idx in (2, 3):
        per_phase = []
        for phase_idx in (0, 1):
            events = naive_scan_events(rows[phase_idx], event_threshold)
            if not events:
                per_phase.append((0.0, 0.0))
                continue
            maxima = []
            coverages = []
            for start, end in events:
                mx, cov = brute_force_event_stats(rows[pathology_idx], start,
                                                  end, pathology_threshold)
                maxima.append(mx)
                coverages.append(cov)
            per_phase.append((sum(maxima) / len(maxima),
                              sum(coverages) / len(coverages)))
        (insp_prob, insp_cov), (exp_prob, exp_cov) = per_phase
        out.extend([insp_prob, exp_prob, insp_cov, exp_cov])
    return out


def finite_difference_grads(params, batch, h=1e-5):
    """Central-difference gradient of the package loss w.r.t. every scalar.

    Returns (weight_grads, bias_grads) as nested python lists shaped like
    the parameters.
    """
    from auscult.qnet import q_loss

    def loss_with(p):
        return q_loss(p, batch)

    weight_grads = []
    for li, w in enumerate(params.weights):
        grad = [[0.0] * w.shape[1] for _ in range(w.shape[0])]
        for i in range(w.shape[0]):
            for j in range(w.shape[1]):
                original = params.weights[li][i, j]
                params.weights[li][i, j] = original + h
                up = loss_with(params)
                params.weights[li][i, j] = original - h
                down = loss_with(params)
                params.weights[li][i, j] = original
                grad[i][j] = (up - down) / (2 * h)
        weight_grads.append(grad)
    bias_grads = []
    for li, b in enumerate(params.biases):
        grad = [0.0] * b.shape[0]
        for j in range(b.shape[0]):
            original = params.biases[li][j]
            params.biases[li][j] = original + h
            up = loss_with(params)
            params.biases[li][j] = original - h
            down = loss_with(params)
            params.biases[li][j] = original
            grad[j] = (up - down) / (2 * h)
        bias_grads.append(grad)
    return weight_grads, bias_grads


def mini_expectimax(cases, limit, observed, count, gamma, *,
                    correct=2.0, wrong=-1.0, step=-0.01, limit_penalty=-10.0):
    """Recursive exhaustive enumeration of the 2-point examination MDP.

    `cases` is a list of (probability, (v1, v2), label). `observed` is a
    pair with None for unseen points. Returns the list of action values
    [auscultate 1, auscultate 2, declare 0, declare 1] at this information
    state; the state value is their max.
    """
    consistent = [(p, values, label) for p, values, label in cases
                  if all(o is None or values[i] == o
                         for i, o in enumerate(observed))]
    total = sum(p for p, _, _ in consistent)
    posterior = [(p / total, values, label) for p, values, label in consistent]

    q = []
    for point in (0, 1):
        new_count = count + 1
        reward = step + (limit_penalty if new_count >= limit else 0.0)
        if new_count >= limit:
            q.append(reward)
            continue
        if observed[point] is not None:
            child = mini_expectimax(cases, limit, observed, new_count, gamma,
                                    correct=correct, wrong=wrong, step=step,
                                    limit_penalty=limit_penalty)
            q.append(reward + gamma * max(child))
            continue
        value = 0.0
        for finding in (0, 1):
            prob = sum(p for p, values, _ in posterior
                       if values[point] == finding)
            if prob == 0.0:
                continue
            branch = list(observed)
            branch[point] = finding
            child = mini_expectimax(cases, limit, tuple(branch), new_count,
                                    gamma, correct=correct, wrong=wrong,
                                    step=step, limit_penalty=limit_penalty)
            value += prob * (reward + gamma * max(child))
        q.append(value)
    for declared in (0, 1):
        q.append(sum(p * (correct if label == declared else wrong)
                     for p, _, label in posterior))
    return q


def reference_binary_metrics(actual, predicted):
    """Recompute balanced accuracy and both F1 values from flag lists.

    Returns (bac, f1_positive, f1_negative) with the 0-when-undefined
    convention, positive meaning flag 1.
    """
    def side(actual_value):
        total = sum(1 for a in actual if a == actual_value)
        hit = sum(1 for a, p in zip(actual, predicted)
                  if a == actual_value and p == actual_value)
        return hit / total if total else 0.0

    bac = 0.5 * (side(1) + side(0))

    def f1_for(positive):
        tp = sum(1 for a, p in zip(actual, predicted)
                 if a == positive and p == positive)
        predicted_pos = sum(1 for p in predicted if p == positive)
        actual_pos = sum(1 for a in actual if a == positive)
        if predicted_pos == 0 or actual_pos == 0:
            return 0.0
        precision = tp / predicted_pos
        recall = tp / actual_pos
        if precision + recall == 0.0:
            return 0.0
        return 2 * precision * recall / (precision + recall)

    return bac, f1_for(1), f1_for(0)


def sample_smooth_gradient_case(rng, layer_sizes, batch_size, margin=1e-3):
    """Draw (params, batch) with every preactivation clear of the relu kink.

    Finite differences disagree with the subgradient when a preactivation
    sits within the probe step of zero, so cases that close are resampled.
    Biases are jittered because freshly initialised ones are exactly zero.
    """
    import numpy as np

    from auscult.qnet import Batch, init_params

    while True:
        params = init_params(int(rng.integers(0, 2**31)), layer_sizes)
        for b in params.biases:
            b[:] = rng.normal(size=b.shape) * 0.3
        states = rng.normal(size=(batch_size, layer_sizes[0]))
        actions = rng.integers(0, layer_sizes[-1], size=batch_size)
        targets = rng.normal(size=batch_size)
        clear = True
        a = states
        for li, (w, b) in enumerate(zip(params.weights, params.biases)):
            z = a @ w + b
            if li < len(params.weights) - 1:
                if np.abs(z).min() < margin:
                    clear = False
                    break
                a = np.maximum(z, 0.0)
        if clear:
            return params, Batch(states, actions, targets)
