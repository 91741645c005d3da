#!/usr/bin/env python3
"""Find the synthetic SNR at which FBECCA lands in the 86-92% accuracy band.

Bisects on SNR with the same seeded generator the acceptance suite uses,
then confirms with 1000 trials. The confirmed constants are frozen into
tests/test_acceptance.py.
"""

import argparse

import numpy as np

from spellerkit.decoders import fbecca_classify, make_ecca_model
from spellerkit.keyboard import build_layout
from spellerkit.signals import SynthConfig, default_mixing, preprocess, synth_trial

LAYOUT = build_layout()


def accuracy_at(snr_db: float, n_test: int, mixing_seed: int, data_seed: int,
                n_train: int = 5) -> float:
    mixing = default_mixing(9, 5, mixing_seed)
    cfg = SynthConfig(snr_db=snr_db, mixing=mixing)
    rng = np.random.default_rng(data_seed)
    train, train_y = [], []
    for c in range(1, 41):
        for _ in range(n_train):
            t = synth_trial(LAYOUT.key(c).stimulus, cfg, seed=int(rng.integers(2**31)))
            train.append(preprocess(t))
            train_y.append(c)
    model = make_ecca_model(train, train_y)
    hits = 0
    for _ in range(n_test):
        c = int(rng.integers(1, 41))
        t = preprocess(synth_trial(LAYOUT.key(c).stimulus, cfg,
                                   seed=int(rng.integers(2**31))))
        hits += fbecca_classify(t, model).predicted == c
    return hits / n_test


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--mixing-seed", type=int, default=7)
    ap.add_argument("--data-seed", type=int, default=100)
    ap.add_argument("--probe-trials", type=int, default=200)
    ap.add_argument("--confirm-trials", type=int, default=1000)
    args = ap.parse_args()

    lo, hi = -24.0, -12.0  # accuracy rises with SNR
    target = 0.89
    snr = None
    for _ in range(6):
        mid = (lo + hi) / 2
        acc = accuracy_at(mid, args.probe_trials, args.mixing_seed, args.data_seed)
        print(f"probe snr={mid:+.2f} dB -> {acc:.1%}")
        if acc < target:
            lo = mid
        else:
            hi = mid
        snr = mid
        if 0.87 <= acc <= 0.91:
            break

    snr = round(snr, 1)
    acc = accuracy_at(snr, args.confirm_trials, args.mixing_seed, args.data_seed)
    print(f"confirm snr={snr:+.1f} dB over {args.confirm_trials} trials -> {acc:.2%}")
    print(f"freeze: ECCA_SNR_DB = {snr}, ECCA_MIXING_SEED = {args.mixing_seed}, "
          f"ECCA_DATA_SEED = {args.data_seed}")


if __name__ == "__main__":
    main()
