"""Frequency-phase target identification for the 40-key board.

Four filter-bank classifiers share one correlation core:

* SCCA  - canonical correlation against sinusoidal references only
* ECCA  - adds averaged-trial templates and a multi-feature correlation set
* DSP   - discriminative spatial patterns from a between/within scatter
          eigenproblem, shared filters across classes
* TRCA  - per-class spatial filters maximizing inter-trial reproducibility

Scores from each sub-band m are combined with weights w(m) = m^-1.25 + 0.25;
per-feature correlations are combined sign-preservingly as sign(r) * r^2.
Ties at the top score resolve to the lowest class index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg as sla

from .errors import (
    DegenerateInput,
    EmptySet,
    InsufficientTrainingData,
    InvalidConfig,
    MissingTemplates,
    ModelMismatch,
    ShapeMismatch,
    SingularCovariance,
    SingularScatter,
)
from .keyboard import KeyboardLayout, StimulusSpec, build_layout
from .signals import WORK_RATE, EegTrial, FilterSpec, apply_filter, design_filter_bank

DEFAULT_N_HARMONICS = 5
DEFAULT_N_BANDS = 5
_REG_EPS = 1e-6
_RANK_TOL = 1e-10

FBSCCA = "FBSCCA"
FBECCA = "FBECCA"
FBDSP = "FBDSP"
FBTRCA = "FBTRCA"


def band_weights(n_bands: int) -> np.ndarray:
    m = np.arange(1, n_bands + 1, dtype=float)
    return m**-1.25 + 0.25


def _center(x: np.ndarray) -> np.ndarray:
    return x - x.mean(axis=1, keepdims=True)


def _check_rows(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeMismatch(f"{name} must be a 2D matrix with >= 1 row")
    if np.any(x.var(axis=1) <= _RANK_TOL):
        raise DegenerateInput(f"{name} has zero-variance rows")
    return x


def _row_space_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis (r x T) of the centered row space."""
    xc = _center(x)
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    rank = int(np.sum(s > s[0] * _RANK_TOL)) if s.size and s[0] > 0 else 0
    if rank == 0:
        raise DegenerateInput("matrix has no signal after centering")
    return vt[:rank]


def cca_corr(x: np.ndarray, y: np.ndarray) -> float:
    """Largest canonical correlation between the row spaces of x and y.

    Computed as the top singular value of the product of orthonormal row-space
    bases, which equals the whitened cross-covariance formulation and is exactly
    invariant to full-rank mixing of either side. Clamped to [0, 1].
    """
    x = _check_rows(x, "X")
    y = _check_rows(y, "Y")
    if x.shape[1] != y.shape[1]:
        raise ShapeMismatch(f"sample counts differ: {x.shape[1]} vs {y.shape[1]}")
    bx = _row_space_basis(x)
    by = _row_space_basis(y)
    s = np.linalg.svd(bx @ by.T, compute_uv=False)
    return float(np.clip(s[0], 0.0, 1.0))


def _inv_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Pseudo-inverse square root of a PSD matrix, dropping null directions."""
    w, v = np.linalg.eigh(m)
    keep = w > max(w[-1], 0.0) * _RANK_TOL
    if not np.any(keep):
        raise DegenerateInput("covariance is identically zero")
    return (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].T


class _Whitened:
    """Centered, covariance-whitened view of a multichannel matrix.

    ``wx`` maps whitened left-singular directions back to channel weights,
    so canonical weights come out in the original channel space.
    """

    def __init__(self, x: np.ndarray):
        xc = _center(np.asarray(x, dtype=float))
        cov = xc @ xc.T / xc.shape[1]
        self.wx = _inv_sqrt_psd(cov)
        self.data = self.wx @ xc
        self.n = xc.shape[1]


def _cca_from_whitened(a: _Whitened, b: _Whitened) -> tuple[float, np.ndarray, np.ndarray]:
    """(rho, w_a, w_b): top canonical correlation and channel-space weights."""
    k = a.data @ b.data.T / a.n
    u, s, vt = np.linalg.svd(k)
    rho = float(np.clip(s[0], 0.0, 1.0))
    return rho, a.wx.T @ u[:, 0], b.wx.T @ vt[0]


def cca_weights(x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Like :func:`cca_corr` but also returns the canonical weight vectors."""
    x = _check_rows(x, "X")
    y = _check_rows(y, "Y")
    if x.shape[1] != y.shape[1]:
        raise ShapeMismatch(f"sample counts differ: {x.shape[1]} vs {y.shape[1]}")
    return _cca_from_whitened(_Whitened(x), _Whitened(y))


def _corr(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        return 0.0
    return float(np.dot(a, b) / denom)


class ReferenceSet:
    """Per-class sin/cos harmonic templates at the class frequency and phase."""

    def __init__(self, stimuli: list[StimulusSpec], n_harmonics: int,
                 n_samples: int, sample_rate: float):
        self.stimuli = list(stimuli)
        self.n_harmonics = n_harmonics
        self.n_samples = n_samples
        self.sample_rate = sample_rate
        t = np.arange(n_samples) / sample_rate
        h = np.arange(1, n_harmonics + 1)[:, None]
        self.matrices = []
        for stim in self.stimuli:
            arg = 2 * np.pi * h * stim.frequency * t + h * stim.phase
            self.matrices.append(np.vstack([np.sin(arg), np.cos(arg)]))
        self._bases = [_row_space_basis(m) for m in self.matrices]
        self._whitened = None

    @property
    def n_classes(self) -> int:
        return len(self.matrices)

    def basis(self, k: int) -> np.ndarray:
        return self._bases[k]

    def whitened(self, k: int) -> _Whitened:
        if self._whitened is None:
            self._whitened = [_Whitened(m) for m in self.matrices]
        return self._whitened[k]

    @classmethod
    def for_layout(cls, layout: KeyboardLayout | None = None,
                   n_harmonics: int = DEFAULT_N_HARMONICS,
                   n_samples: int = int(1.5 * WORK_RATE),
                   sample_rate: float = WORK_RATE) -> "ReferenceSet":
        layout = layout or build_layout()
        return cls([k.stimulus for k in layout.keys], n_harmonics, n_samples, sample_rate)


class TrialTemplates:
    """Per-class averaged training trials."""

    def __init__(self, means: np.ndarray, counts: list[int]):
        if means.ndim != 3:
            raise InvalidConfig("template means must be (classes, channels, samples)")
        if min(counts) < 1:
            raise InvalidConfig("each class needs at least one averaged trial")
        self.means = means
        self.counts = list(counts)

    @classmethod
    def from_trials(cls, trials: list[EegTrial], labels: list[int],
                    classes: list[int]) -> "TrialTemplates":
        by_class = {c: [] for c in classes}
        for trial, label in zip(trials, labels):
            if label in by_class:
                by_class[label].append(trial.data)
        counts = [len(by_class[c]) for c in classes]
        if min(counts, default=0) < 1:
            raise InsufficientTrainingData("every class needs at least one trial")
        means = np.stack([np.mean(by_class[c], axis=0) for c in classes])
        return cls(means, counts)


@dataclass
class DecoderModel:
    algorithm: str
    classes: list[int]  # key indices, 1-based
    bank: list[FilterSpec]
    weights: np.ndarray
    references: ReferenceSet | None = None
    templates: TrialTemplates | None = None
    # DSP: per-band shared (channels x components); TRCA: per-band, per-class vectors
    spatial_filters: list[np.ndarray] | None = None
    sample_rate: float = WORK_RATE
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0):
            raise InvalidConfig("band weights must be strictly positive")
        if self.algorithm in (FBECCA, FBDSP, FBTRCA) and self.templates is None:
            raise MissingTemplates(f"{self.algorithm} requires trial templates")
        if self.algorithm in (FBDSP, FBTRCA) and self.spatial_filters is None:
            raise InvalidConfig(f"{self.algorithm} requires spatial filters")

    def banded_template(self, band: int, k: int) -> np.ndarray:
        key = ("tmpl", band, k)
        if key not in self._cache:
            self._cache[key] = apply_filter(
                self.templates.means[k], self.bank[band], self.sample_rate
            )
        return self._cache[key]

    def whitened_template(self, band: int, k: int) -> _Whitened:
        key = ("tmplw", band, k)
        if key not in self._cache:
            self._cache[key] = _Whitened(self.banded_template(band, k))
        return self._cache[key]

    def template_ref_weights(self, band: int, k: int) -> np.ndarray:
        """Canonical channel weights from CCA(template_k, reference_k)."""
        key = ("w4", band, k)
        if key not in self._cache:
            _, w, _ = _cca_from_whitened(
                self.whitened_template(band, k), self.references.whitened(k)
            )
            self._cache[key] = w
        return self._cache[key]


def _check_trial(trial: EegTrial, model: DecoderModel) -> np.ndarray:
    if model.references is not None and trial.n_samples != model.references.n_samples:
        raise ShapeMismatch(
            f"trial has {trial.n_samples} samples, model expects "
            f"{model.references.n_samples}"
        )
    if model.templates is not None and trial.n_samples != model.templates.means.shape[2]:
        raise ShapeMismatch("trial length does not match template length")
    return _check_rows(trial.data, "trial")


def _result(model: DecoderModel, scores: np.ndarray) -> "DecodeResult":
    # np.argmax returns the first maximum, which is the lowest class index
    return DecodeResult(predicted=model.classes[int(np.argmax(scores))], scores=scores)


@dataclass
class DecodeResult:
    predicted: int
    scores: np.ndarray


def make_scca_model(n_bands: int = DEFAULT_N_BANDS,
                    n_harmonics: int = DEFAULT_N_HARMONICS,
                    n_samples: int = int(1.5 * WORK_RATE),
                    layout: KeyboardLayout | None = None) -> DecoderModel:
    refs = ReferenceSet.for_layout(layout, n_harmonics, n_samples)
    return DecoderModel(
        algorithm=FBSCCA,
        classes=list(range(1, refs.n_classes + 1)),
        bank=design_filter_bank(n_bands),
        weights=band_weights(n_bands),
        references=refs,
    )


def fbscca_classify(trial: EegTrial, model: DecoderModel) -> DecodeResult:
    """Weighted sum over bands of squared canonical correlations to each class."""
    if model.algorithm != FBSCCA:
        raise ModelMismatch(f"expected FBSCCA model, got {model.algorithm}")
    data = _check_trial(trial, model)
    refs = model.references
    scores = np.zeros(refs.n_classes)
    for m, spec in enumerate(model.bank):
        banded = apply_filter(data, spec, model.sample_rate)
        bx = _row_space_basis(banded)
        for k in range(refs.n_classes):
            s = np.linalg.svd(bx @ refs.basis(k).T, compute_uv=False)
            rho = float(np.clip(s[0], 0.0, 1.0))
            scores[k] += model.weights[m] * rho**2
    return _result(model, scores)


def make_ecca_model(trials: list[EegTrial], labels: list[int],
                    n_bands: int = DEFAULT_N_BANDS,
                    n_harmonics: int = DEFAULT_N_HARMONICS,
                    layout: KeyboardLayout | None = None) -> DecoderModel:
    if not trials:
        raise InsufficientTrainingData("no training trials")
    classes = sorted(set(labels))
    layout = layout or build_layout()
    n_samples = trials[0].n_samples
    refs = ReferenceSet(
        [layout.key(c).stimulus for c in classes], n_harmonics, n_samples, WORK_RATE
    )
    templates = TrialTemplates.from_trials(trials, labels, classes)
    return DecoderModel(
        algorithm=FBECCA,
        classes=classes,
        bank=design_filter_bank(n_bands),
        weights=band_weights(n_bands),
        references=refs,
        templates=templates,
    )


def fbecca_classify(trial: EegTrial, model: DecoderModel) -> DecodeResult:
    """Extended-CCA feature set, sign-preserving squared combination.

    Per class: (1) canonical correlation against the sinusoidal reference;
    (2) correlation of trial and template projected through weights from
    CCA(trial, template); (3) same projection with weights from
    CCA(trial, reference); (4) same with weights from CCA(template, reference).
    """
    if model.algorithm != FBECCA:
        raise ModelMismatch(f"expected FBECCA model, got {model.algorithm}")
    if model.templates is None:
        raise MissingTemplates("FBECCA model lacks trial templates")
    data = _check_trial(trial, model)
    refs = model.references
    scores = np.zeros(len(model.classes))
    for m, spec in enumerate(model.bank):
        banded = apply_filter(data, spec, model.sample_rate)
        xw = _Whitened(banded)
        xc = _center(banded)
        for k in range(len(model.classes)):
            tmpl_c = _center(model.banded_template(m, k))
            r1, w3, _ = _cca_from_whitened(xw, refs.whitened(k))
            _, w2, _ = _cca_from_whitened(xw, model.whitened_template(m, k))
            w4 = model.template_ref_weights(m, k)
            feats = (
                r1,
                _corr(w2 @ xc, w2 @ tmpl_c),
                _corr(w3 @ xc, w3 @ tmpl_c),
                _corr(w4 @ xc, w4 @ tmpl_c),
            )
            combined = sum(np.sign(r) * r**2 for r in feats)
            scores[k] += model.weights[m] * combined
    return _result(model, scores)


def _regularized(m: np.ndarray) -> np.ndarray:
    c = m.shape[0]
    return m + _REG_EPS * (np.trace(m) / c + 1e-30) * np.eye(c)


def _gen_eig_desc(a: np.ndarray, b: np.ndarray, err_cls) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the pencil (a, b), descending; b regularized first."""
    try:
        w, v = sla.eigh(a, _regularized(b))
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise err_cls(f"generalized eigenproblem failed: {exc}") from exc
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def _group_by_class(trials: list[EegTrial], labels: list[int]) -> dict[int, list[np.ndarray]]:
    groups: dict[int, list[np.ndarray]] = {}
    for trial, label in zip(trials, labels):
        groups.setdefault(label, []).append(trial.data)
    return groups


def fbdsp_train(trials: list[EegTrial], labels: list[int],
                n_bands: int = DEFAULT_N_BANDS,
                n_components: int = 4,
                n_harmonics: int = DEFAULT_N_HARMONICS,
                layout: KeyboardLayout | None = None) -> DecoderModel:
    """Discriminative spatial patterns from between/within-class scatter.

    Per band, solves S_b w = lambda S_w w where S_b is the scatter of class-mean
    trials around the grand mean and S_w the scatter of trials around their
    class mean; keeps the top ``n_components`` eigenvectors as a shared filter.
    """
    groups = _group_by_class(trials, labels)
    if len(groups) < 2:
        raise InsufficientTrainingData("need >= 2 classes")
    if any(len(g) < 2 for g in groups.values()):
        raise InsufficientTrainingData("need >= 2 trials per class")
    classes = sorted(groups)
    sample_rate = trials[0].sample_rate
    bank = design_filter_bank(n_bands)
    templates = TrialTemplates.from_trials(trials, labels, classes)

    filters = []
    for spec in bank:
        banded = {c: [_center(apply_filter(x, spec, sample_rate)) for x in groups[c]]
                  for c in classes}
        class_means = {c: np.mean(banded[c], axis=0) for c in classes}
        grand = np.mean([class_means[c] for c in classes], axis=0)
        s_b = sum((class_means[c] - grand) @ (class_means[c] - grand).T for c in classes)
        s_w = sum(
            (x - class_means[c]) @ (x - class_means[c]).T
            for c in classes for x in banded[c]
        )
        _, v = _gen_eig_desc(s_b, s_w, SingularScatter)
        filters.append(v[:, :n_components])

    layout = layout or build_layout()
    n_samples = trials[0].n_samples
    refs = ReferenceSet(
        [layout.key(c).stimulus for c in classes], n_harmonics, n_samples, sample_rate
    )
    return DecoderModel(
        algorithm=FBDSP,
        classes=classes,
        bank=bank,
        weights=band_weights(n_bands),
        references=refs,
        templates=templates,
        spatial_filters=filters,
        sample_rate=sample_rate,
    )


def fbdsp_classify(trial: EegTrial, model: DecoderModel) -> DecodeResult:
    if model.algorithm != FBDSP:
        raise ModelMismatch(f"expected FBDSP model, got {model.algorithm}")
    data = _check_trial(trial, model)
    scores = np.zeros(len(model.classes))
    for m, spec in enumerate(model.bank):
        w = model.spatial_filters[m]
        projected = (w.T @ _center(apply_filter(data, spec, model.sample_rate))).ravel()
        for k in range(len(model.classes)):
            r = _corr(projected, (w.T @ _center(model.banded_template(m, k))).ravel())
            scores[k] += model.weights[m] * np.sign(r) * r**2
    return _result(model, scores)


def fbtrca_train(trials: list[EegTrial], labels: list[int],
                 n_bands: int = DEFAULT_N_BANDS) -> DecoderModel:
    """Task-related component analysis: per class and band, the spatial filter
    is the leading eigenvector of Q^-1 S, with S the summed cross-trial
    covariance and Q the covariance of the concatenated trials."""
    groups = _group_by_class(trials, labels)
    if any(len(g) < 2 for g in groups.values()):
        raise InsufficientTrainingData("need >= 2 trials per class")
    classes = sorted(groups)
    sample_rate = trials[0].sample_rate
    bank = design_filter_bank(n_bands)
    templates = TrialTemplates.from_trials(trials, labels, classes)

    filters = []  # per band: (classes, channels)
    for spec in bank:
        per_class = []
        for c in classes:
            xs = [_center(apply_filter(x, spec, sample_rate)) for x in groups[c]]
            total = np.sum(xs, axis=0)
            q = sum(x @ x.T for x in xs)
            # sum of cross-trial covariances: outer of the sum minus own terms
            s = total @ total.T - q
            _, v = _gen_eig_desc(s, q, SingularCovariance)
            per_class.append(v[:, 0])
        filters.append(np.stack(per_class))

    return DecoderModel(
        algorithm=FBTRCA,
        classes=classes,
        bank=bank,
        weights=band_weights(n_bands),
        templates=templates,
        spatial_filters=filters,
        sample_rate=sample_rate,
    )


def fbtrca_classify(trial: EegTrial, model: DecoderModel) -> DecodeResult:
    if model.algorithm != FBTRCA:
        raise ModelMismatch(f"expected FBTRCA model, got {model.algorithm}")
    data = _check_trial(trial, model)
    scores = np.zeros(len(model.classes))
    for m, spec in enumerate(model.bank):
        banded = _center(apply_filter(data, spec, model.sample_rate))
        for k in range(len(model.classes)):
            w = model.spatial_filters[m][k]
            r = _corr(w @ banded, w @ _center(model.banded_template(m, k)))
            scores[k] += model.weights[m] * np.sign(r) * r**2
    return _result(model, scores)


_CLASSIFIERS = {
    FBSCCA: fbscca_classify,
    FBECCA: fbecca_classify,
    FBDSP: fbdsp_classify,
    FBTRCA: fbtrca_classify,
}


def classify(trial: EegTrial, model: DecoderModel) -> DecodeResult:
    return _CLASSIFIERS[model.algorithm](trial, model)


def evaluate_accuracy(model: DecoderModel, trials: list[EegTrial],
                      labels: list[int]) -> float:
    """Fraction of trials whose prediction equals the label."""
    if not trials:
        raise EmptySet("no trials to evaluate")
    hits = sum(classify(t, model).predicted == y for t, y in zip(trials, labels))
    return hits / len(trials)


_MODEL_FORMAT_VERSION = 1


def save_model(model: DecoderModel, path: str | Path) -> None:
    doc = {
        "format_version": _MODEL_FORMAT_VERSION,
        "algorithm": model.algorithm,
        "classes": model.classes,
        "sample_rate": model.sample_rate,
        "bank": [
            {"low": s.low, "high": s.high, "order": s.order, "zero_phase": s.zero_phase}
            for s in model.bank
        ],
        "weights": model.weights.tolist(),
    }
    if model.references is not None:
        refs = model.references
        doc["references"] = {
            "frequencies": [s.frequency for s in refs.stimuli],
            "phases": [s.phase for s in refs.stimuli],
            "n_harmonics": refs.n_harmonics,
            "n_samples": refs.n_samples,
            "sample_rate": refs.sample_rate,
        }
    if model.templates is not None:
        doc["templates"] = {
            "means": model.templates.means.tolist(),
            "counts": model.templates.counts,
        }
    if model.spatial_filters is not None:
        doc["spatial_filters"] = [f.tolist() for f in model.spatial_filters]
    Path(path).write_text(json.dumps(doc))


def load_model(path: str | Path) -> DecoderModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != _MODEL_FORMAT_VERSION:
        raise InvalidConfig(f"unsupported model format {doc.get('format_version')}")
    references = None
    if "references" in doc:
        r = doc["references"]
        references = ReferenceSet(
            [StimulusSpec(f, p) for f, p in zip(r["frequencies"], r["phases"])],
            r["n_harmonics"], r["n_samples"], r["sample_rate"],
        )
    templates = None
    if "templates" in doc:
        templates = TrialTemplates(np.array(doc["templates"]["means"]),
                                   doc["templates"]["counts"])
    filters = None
    if "spatial_filters" in doc:
        filters = [np.array(f) for f in doc["spatial_filters"]]
    return DecoderModel(
        algorithm=doc["algorithm"],
        classes=doc["classes"],
        bank=[FilterSpec(**b) for b in doc["bank"]],
        weights=np.array(doc["weights"]),
        references=references,
        templates=templates,
        spatial_filters=filters,
        sample_rate=doc["sample_rate"],
    )
