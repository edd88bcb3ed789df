"""Held-out evaluation, the exhaustive-sweep baseline, and repeated
k-fold cross-validation.

Evaluation rolls out the greedy policy on held-out examinations. Episodes
that exhaust the auscultation limit without declaring score as a wrong
prediction at 12 auscultations; everything else scores its declared label
after merging to the binary alarm task.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cohort import Examination, N_POINTS
from .env import AuscultationEnv, EnvConfig, StaticSweepEnv
from .metrics import (
    ALARM,
    NOT_ALARM,
    ConfusionCounts,
    balanced_accuracy,
    counts_from_flags,
    f1,
    merge_to_alarm,
)
from .qnet import QNetworkParams
from .trainer import TrainConfig, run_episode, train

_EVAL_SALT = 0xE7A1
_SELECT_SALT = 0x5E1E


@dataclass
class EvalReport:
    bac: float
    f1_alarm: float
    f1_not_alarm: float
    mean_aps: float
    counts: ConfusionCounts
    n: int
    point_counts: list[int]

    def as_document(self) -> dict:
        return {
            "bac": self.bac,
            "f1_alarm": self.f1_alarm,
            "f1_not_alarm": self.f1_not_alarm,
            "mean_aps": self.mean_aps,
            "n": self.n,
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp,
                       "tn": self.counts.tn, "fn": self.counts.fn},
            "point_counts": list(self.point_counts),
        }


def _greedy_eval(params: QNetworkParams, exams, env_cls, env_config, seed) -> EvalReport:
    if not exams:
        raise ValueError("cannot evaluate on an empty split")
    env = env_cls(env_config or EnvConfig(), rng=np.random.default_rng(seed))
    actual_flags = []
    predicted_flags = []
    aps = []
    point_counts = [0] * N_POINTS
    for exam in exams:
        result = run_episode(params, env, exam, epsilon=0.0, rng=None)
        actual = merge_to_alarm(exam.label)
        if result.declared_label is None:
            predicted = ALARM if actual == NOT_ALARM else NOT_ALARM
        else:
            predicted = merge_to_alarm(result.declared_label)
        actual_flags.append(actual)
        predicted_flags.append(predicted)
        aps.append(result.auscultations)
        for action in result.actions:
            if action < N_POINTS:
                point_counts[action] += 1
    counts = counts_from_flags(actual_flags, predicted_flags)
    return EvalReport(
        bac=balanced_accuracy(counts),
        f1_alarm=f1(counts, ALARM),
        f1_not_alarm=f1(counts, NOT_ALARM),
        mean_aps=float(np.mean(aps)),
        counts=counts,
        n=len(exams),
        point_counts=point_counts,
    )


def evaluate_interactive(params: QNetworkParams, exams,
                         env_config: EnvConfig | None = None, *,
                         seed: int = 0) -> EvalReport:
    """Greedy rollouts of a trained policy on held-out examinations."""
    return _greedy_eval(params, exams, AuscultationEnv, env_config, [seed, _EVAL_SALT])


def _validation_selector(validation, env_cls, env_config, seed):
    def score(params: QNetworkParams) -> float:
        report = _greedy_eval(params, validation, env_cls, env_config,
                              [seed, _SELECT_SALT])
        return report.bac
    return score


@dataclass(frozen=True)
class Split:
    train: tuple[Examination, ...]
    validation: tuple[Examination, ...]
    test: tuple[Examination, ...]


# Validation share of the non-test remainder, matching a 365/91 split.
_VALIDATION_FRACTION = 91 / 456


def split_cohort(exams, folds: int, rng: np.random.Generator) -> list[Split]:
    """One shuffled partition into `folds` test chunks; the remainder of
    each fold splits into train and validation."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if len(exams) < folds:
        raise ValueError("more folds than examinations")
    order = rng.permutation(len(exams))
    chunks = np.array_split(order, folds)
    splits = []
    for k in range(folds):
        test_idx = chunks[k]
        rest = np.concatenate([chunks[j] for j in range(folds) if j != k])
        n_val = int(round(len(rest) * _VALIDATION_FRACTION))
        splits.append(Split(
            train=tuple(exams[i] for i in rest[n_val:]),
            validation=tuple(exams[i] for i in rest[:n_val]),
            test=tuple(exams[i] for i in test_idx),
        ))
    return splits


def train_and_evaluate(split: Split, config: TrainConfig,
                       env_config: EnvConfig | None = None, *,
                       static: bool = False) -> EvalReport:
    """Train on the split's train set, keep the checkpoint with the best
    validation balanced accuracy, and score it on the test set."""
    env_cls = StaticSweepEnv if static else AuscultationEnv
    selector = None
    if split.validation:
        selector = _validation_selector(split.validation, env_cls, env_config,
                                        config.seed)
    result = train(split.train, config, env_config, static=static,
                   selector=selector)
    params = result.best_params if result.best_params is not None else result.params
    return _greedy_eval(params, split.test, env_cls, env_config,
                        [config.seed, _EVAL_SALT])


def evaluate_static(split: Split, config: TrainConfig,
                    env_config: EnvConfig | None = None) -> EvalReport:
    """Baseline that must sweep all 12 points before declaring; mean
    auscultations is 12 by construction."""
    return train_and_evaluate(split, config, env_config, static=True)


@dataclass
class FoldReport:
    repeat: int
    fold: int
    report: EvalReport


@dataclass
class CrossValReport:
    folds: list[FoldReport]
    mean_bac: float
    std_bac: float
    mean_f1_alarm: float
    std_f1_alarm: float
    mean_f1_not_alarm: float
    std_f1_not_alarm: float
    mean_aps: float
    std_aps: float
    n_folds: int
    n_repeats: int

    def as_document(self) -> dict:
        return {
            "n_folds": self.n_folds,
            "n_repeats": self.n_repeats,
            "mean_bac": self.mean_bac,
            "std_bac": self.std_bac,
            "mean_f1_alarm": self.mean_f1_alarm,
            "std_f1_alarm": self.std_f1_alarm,
            "mean_f1_not_alarm": self.mean_f1_not_alarm,
            "std_f1_not_alarm": self.std_f1_not_alarm,
            "mean_aps": self.mean_aps,
            "std_aps": self.std_aps,
            "folds": [{"repeat": f.repeat, "fold": f.fold,
                       **f.report.as_document()} for f in self.folds],
        }

    def fold_table(self) -> str:
        """Flat table, one row per fold, for external plotting."""
        lines = ["repeat\tfold\tbac\tf1_alarm\tf1_not_alarm\tmean_aps"]
        for f in self.folds:
            r = f.report
            lines.append(f"{f.repeat}\t{f.fold}\t{r.bac!r}\t{r.f1_alarm!r}"
                         f"\t{r.f1_not_alarm!r}\t{r.mean_aps!r}")
        return "\n".join(lines) + "\n"


def _aggregate(folds: list[FoldReport], n_folds: int, n_repeats: int) -> CrossValReport:
    def stats(values):
        arr = np.array(values)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        return float(arr.mean()), std

    mean_bac, std_bac = stats([f.report.bac for f in folds])
    mean_f1a, std_f1a = stats([f.report.f1_alarm for f in folds])
    mean_f1n, std_f1n = stats([f.report.f1_not_alarm for f in folds])
    mean_aps, std_aps = stats([f.report.mean_aps for f in folds])
    return CrossValReport(
        folds=folds,
        mean_bac=mean_bac, std_bac=std_bac,
        mean_f1_alarm=mean_f1a, std_f1_alarm=std_f1a,
        mean_f1_not_alarm=mean_f1n, std_f1_not_alarm=std_f1n,
        mean_aps=mean_aps, std_aps=std_aps,
        n_folds=n_folds, n_repeats=n_repeats,
    )


def cross_validate_fixed(params: QNetworkParams, cohort, folds: int = 5,
                         repeats: int = 30,
                         env_config: EnvConfig | None = None, *,
                         seed: int = 0) -> CrossValReport:
    """Score one fixed checkpoint over the same repeated fold partitions the
    training cross-validation uses, without retraining."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if repeats < 1:
        raise ValueError("need at least 1 repeat")
    master = np.random.SeedSequence(seed)
    fold_reports: list[FoldReport] = []
    for repeat, repeat_ss in enumerate(master.spawn(repeats)):
        shuffle_ss, eval_ss = repeat_ss.spawn(2)
        splits = split_cohort(cohort, folds, np.random.default_rng(shuffle_ss))
        for fold, (split, fold_ss) in enumerate(zip(splits, eval_ss.spawn(folds))):
            report = _greedy_eval(params, split.test, AuscultationEnv,
                                  env_config, fold_ss)
            fold_reports.append(FoldReport(repeat=repeat, fold=fold,
                                           report=report))
    return _aggregate(fold_reports, folds, repeats)


def cross_validate(cohort, config: TrainConfig, folds: int = 5,
                   repeats: int = 30, env_config: EnvConfig | None = None, *,
                   seed: int = 0, static: bool = False,
                   progress=None) -> CrossValReport:
    """Repeated k-fold cross-validation: each repeat reshuffles, partitions
    into disjoint test folds, trains per fold and aggregates fold-level
    metrics (mean and sample standard deviation)."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if repeats < 1:
        raise ValueError("need at least 1 repeat")
    master = np.random.SeedSequence(seed)
    fold_reports: list[FoldReport] = []
    for repeat, repeat_ss in enumerate(master.spawn(repeats)):
        shuffle_ss, *fold_seeds = repeat_ss.spawn(folds + 1)
        splits = split_cohort(cohort, folds, np.random.default_rng(shuffle_ss))
        for fold, (split, fold_ss) in enumerate(zip(splits, fold_seeds)):
            fold_config = replace(config, seed=int(fold_ss.generate_state(1)[0]))
            report = train_and_evaluate(split, fold_config, env_config,
                                        static=static)
            fold_reports.append(FoldReport(repeat=repeat, fold=fold,
                                           report=report))
            if progress is not None:
                progress(repeat, fold, report)
    return _aggregate(fold_reports, folds, repeats)
