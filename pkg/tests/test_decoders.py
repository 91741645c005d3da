import numpy as np
import pytest

from spellerkit.decoders import (
    DecoderModel,
    FBSCCA,
    band_weights,
    cca_corr,
    cca_weights,
    evaluate_accuracy,
    fbdsp_classify,
    fbdsp_train,
    fbecca_classify,
    fbscca_classify,
    fbtrca_classify,
    fbtrca_train,
    load_model,
    make_ecca_model,
    make_scca_model,
    save_model,
)
from spellerkit.errors import (
    DegenerateInput,
    EmptySet,
    InsufficientTrainingData,
    MissingTemplates,
    ModelMismatch,
    ShapeMismatch,
)
from spellerkit.keyboard import build_layout
from spellerkit.signals import EegTrial, SynthConfig, default_mixing, preprocess, synth_trial

LAYOUT = build_layout()
RNG = np.random.default_rng(1234)


def grid_search_cca_2row(x: np.ndarray, y: np.ndarray, n_angles: int = 1440) -> float:
    """Brute-force oracle: max |pearson| over dense projection-angle grids."""
    ang = np.linspace(0.0, np.pi, n_angles, endpoint=False)
    basis = np.stack([np.cos(ang), np.sin(ang)])  # 2 x n

    def projections(m):
        p = basis.T @ (m - m.mean(axis=1, keepdims=True))
        p -= p.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(p, axis=1, keepdims=True)
        return p / np.where(norms == 0, 1, norms)

    corr = projections(x) @ projections(y).T
    return float(np.max(np.abs(corr)))


def test_cca_identity():
    x = RNG.standard_normal((4, 300))
    assert cca_corr(x, x) == pytest.approx(1.0, abs=1e-9)


def test_cca_symmetry():
    x = RNG.standard_normal((3, 200))
    y = RNG.standard_normal((5, 200))
    assert cca_corr(x, y) == pytest.approx(cca_corr(y, x), abs=1e-9)


def test_cca_mixing_invariance():
    x = RNG.standard_normal((4, 240))
    y = RNG.standard_normal((3, 240))
    base = cca_corr(x, y)
    for seed in range(5):
        m = np.random.default_rng(seed).standard_normal((4, 4))
        assert cca_corr(m @ x, y) == pytest.approx(base, abs=1e-6)


def test_cca_orthogonal_tones():
    t = np.arange(360) / 240.0
    x = np.sin(2 * np.pi * 10 * t)[None, :]
    y = np.sin(2 * np.pi * 17 * t)[None, :]
    assert cca_corr(x, y) < 0.2


@pytest.mark.parametrize("seed", range(6))
def test_cca_matches_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 360))
    y = rng.standard_normal((2, 360))
    assert cca_corr(x, y) == pytest.approx(grid_search_cca_2row(x, y), abs=1e-3)


def test_cca_errors():
    x = RNG.standard_normal((2, 100))
    with pytest.raises(ShapeMismatch):
        cca_corr(x, RNG.standard_normal((2, 99)))
    with pytest.raises(DegenerateInput):
        cca_corr(np.zeros((2, 100)), x)
    flat = np.vstack([np.ones(100), RNG.standard_normal(100)])
    with pytest.raises(DegenerateInput):
        cca_corr(flat, x)


def test_cca_weights_recover_correlated_direction():
    rng = np.random.default_rng(3)
    shared = rng.standard_normal(500)
    x = np.vstack([shared + 0.01 * rng.standard_normal(500), rng.standard_normal(500)])
    y = np.vstack([rng.standard_normal(500), shared + 0.01 * rng.standard_normal(500)])
    rho, wx, wy = cca_weights(x, y)
    assert rho > 0.99
    assert abs(wx[0]) > 10 * abs(wx[1])
    assert abs(wy[1]) > 10 * abs(wy[0])


def test_band_weights_positive_decreasing():
    w = band_weights(5)
    assert np.all(w > 0)
    assert np.all(np.diff(w) < 0)


def _noiseless_trial(key: int, seed: int = 0, snr_db=None) -> EegTrial:
    cfg = SynthConfig(snr_db=snr_db, mixing=default_mixing(9, 5, 7))
    return preprocess(synth_trial(LAYOUT.key(key).stimulus, cfg, seed=seed))


@pytest.fixture(scope="module")
def scca_model():
    return make_scca_model()


@pytest.mark.parametrize("key", [1, 7, 23, 40])
def test_fbscca_noiseless(scca_model, key):
    assert fbscca_classify(_noiseless_trial(key), scca_model).predicted == key


def test_fbscca_rejects_zero_trial(scca_model):
    with pytest.raises(DegenerateInput):
        fbscca_classify(EegTrial(np.zeros((9, 360)), 240.0), scca_model)


def test_fbscca_scale_invariant_argmax(scca_model):
    trial = _noiseless_trial(12, snr_db=0.0)
    scaled = EegTrial(trial.data * 37.5, trial.sample_rate)
    a = fbscca_classify(trial, scca_model)
    b = fbscca_classify(scaled, scca_model)
    assert a.predicted == b.predicted
    assert np.allclose(a.scores, b.scores, rtol=1e-8)


def test_fbscca_model_mismatch(scca_model):
    trials = [_noiseless_trial(k, seed=s) for k in (1, 2) for s in (0, 1)]
    ecca = make_ecca_model(trials, [1, 1, 2, 2])
    with pytest.raises(ModelMismatch):
        fbscca_classify(_noiseless_trial(1), ecca)
    with pytest.raises(ModelMismatch):
        fbecca_classify(_noiseless_trial(1), scca_model)


def test_fbscca_shape_mismatch(scca_model):
    with pytest.raises(ShapeMismatch):
        fbscca_classify(EegTrial(RNG.standard_normal((9, 100)), 240.0), scca_model)


def test_tie_break_lowest_class():
    model = make_scca_model()
    scores = np.zeros(40)
    scores[[4, 9]] = 1.0  # equal top scores
    from spellerkit.decoders import _result
    assert _result(model, scores).predicted == 5


def test_ecca_single_training_trial_is_valid():
    trials = [_noiseless_trial(k, seed=0) for k in (3, 4)]
    model = make_ecca_model(trials, [3, 4])
    assert model.templates.counts == [1, 1]
    assert fbecca_classify(_noiseless_trial(3, seed=5), model).predicted == 3


def test_ecca_recovers_noisy_trial():
    train = [_noiseless_trial(k) for k in (5, 12, 30)]
    model = make_ecca_model(train, [5, 12, 30])
    noisy = preprocess(synth_trial(
        LAYOUT.key(12).stimulus,
        SynthConfig(snr_db=5.0, mixing=default_mixing(9, 5, 7)), seed=77,
    ))
    assert fbecca_classify(noisy, model).predicted == 12


def test_templates_required():
    with pytest.raises(MissingTemplates):
        DecoderModel(algorithm="FBECCA", classes=[1], bank=[], weights=np.array([1.0]))


def test_fbdsp_insufficient_data():
    trials = [_noiseless_trial(1, seed=s) for s in range(3)]
    with pytest.raises(InsufficientTrainingData):
        fbdsp_train(trials, [1, 1, 1])  # one class only
    with pytest.raises(InsufficientTrainingData):
        fbdsp_train([_noiseless_trial(1), _noiseless_trial(2)], [1, 2])  # 1 each


def _noisy_set(keys, n_each, snr, seed0):
    cfg = SynthConfig(snr_db=snr, mixing=default_mixing(9, 5, 7))
    trials, labels = [], []
    s = seed0
    for k in keys:
        for _ in range(n_each):
            trials.append(preprocess(synth_trial(LAYOUT.key(k).stimulus, cfg, seed=s)))
            labels.append(k)
            s += 1
    return trials, labels


def test_fbdsp_self_consistency():
    trials, labels = _noisy_set([2, 9, 17, 33], n_each=3, snr=10.0, seed0=100)
    model = fbdsp_train(trials, labels)
    assert evaluate_accuracy(model, trials, labels) == 1.0


def test_fbtrca_insufficient_data():
    with pytest.raises(InsufficientTrainingData):
        fbtrca_train([_noiseless_trial(1), _noiseless_trial(2)], [1, 2])


def test_fbtrca_duplicate_trials_regularized():
    a, b = _noiseless_trial(1), _noiseless_trial(2)
    model = fbtrca_train([a, a, b, b], [1, 1, 2, 2])
    assert fbtrca_classify(a, model).predicted == 1


def test_fbtrca_holdout():
    train, labels = _noisy_set([4, 11, 26], n_each=4, snr=0.0, seed0=500)
    model = fbtrca_train(train, labels)
    test, test_y = _noisy_set([4, 11, 26], n_each=2, snr=0.0, seed0=900)
    assert evaluate_accuracy(model, test, test_y) == 1.0


def test_evaluate_accuracy_empty():
    with pytest.raises(EmptySet):
        evaluate_accuracy(make_scca_model(), [], [])


def test_evaluate_accuracy_fraction(scca_model):
    trials = [_noiseless_trial(k) for k in (1, 2, 3)]
    assert evaluate_accuracy(scca_model, trials, [1, 2, 3]) == 1.0
    assert evaluate_accuracy(scca_model, trials, [1, 2, 4]) == pytest.approx(2 / 3)


def test_model_save_load_round_trip(tmp_path):
    train, labels = _noisy_set([3, 8], n_each=2, snr=5.0, seed0=50)
    for model in (make_scca_model(), make_ecca_model(train, labels),
                  fbdsp_train(train, labels), fbtrca_train(train, labels)):
        path = tmp_path / f"{model.algorithm}.json"
        save_model(model, path)
        back = load_model(path)
        assert back.algorithm == model.algorithm
        assert back.classes == model.classes
        probe = _noiseless_trial(model.classes[0], seed=31, snr_db=5.0)
        from spellerkit.decoders import classify
        a, b = classify(probe, model), classify(probe, back)
        assert a.predicted == b.predicted
        assert np.allclose(a.scores, b.scores, rtol=1e-10)


def test_classify_deterministic(scca_model):
    trial = _noiseless_trial(6, snr_db=0.0)
    runs = [fbscca_classify(trial, scca_model).scores for _ in range(2)]
    assert np.array_equal(runs[0], runs[1])


def test_fbscca_high_snr_monte_carlo(scca_model):
    cfg = SynthConfig(snr_db=30.0, mixing=default_mixing(9, 5, 7))
    stim = LAYOUT.key(19).stimulus
    hits = sum(
        fbscca_classify(preprocess(synth_trial(stim, cfg, seed=s)),
                        scca_model).predicted == 19
        for s in range(100)
    )
    assert hits >= 99


def test_fbscca_floor_is_chance_level(scca_model):
    cfg = SynthConfig(snr_db=-40.0, mixing=default_mixing(9, 5, 7))
    rng = np.random.default_rng(4242)
    n = 400
    hits = 0
    for _ in range(n):
        key = int(rng.integers(1, 41))
        trial = preprocess(synth_trial(LAYOUT.key(key).stimulus, cfg,
                                       seed=int(rng.integers(2**31))))
        hits += fbscca_classify(trial, scca_model).predicted == key
    assert abs(hits / n - 1 / 40) <= 0.03  # within 3 points of chance
