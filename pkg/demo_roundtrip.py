#!/usr/bin/env python
"""Quick demo of synthesis, extraction and the Hilbert split."""

import numpy as np

from orthoeq import (
    GenConfig,
    PairingMode,
    SectionMode,
    extract,
    gen_instance,
    hilbert_decompose,
    residual,
    synthesize,
    verify_decomposition,
)


def demo():
    """Run a quick demonstration on one seeded case."""
    print("\n" + "=" * 70)
    print("ORTHOGONALITY EQUATION TOOLKIT - DEMO")
    print("=" * 70)

    cfg = GenConfig(
        n=2,
        m=4,
        rank_l=3,
        rank_m=1,
        seed=42,
        pairing_mode=PairingMode.RANDOM_SPD,
        section_mode=SectionMode.POLYNOMIAL,
    )
    print(f"\nGenerating a certificate for E = R^{cfg.n}, F = R^{cfg.m} (seed {cfg.seed})...")
    inst = gen_instance(cfg)

    print("\n" + "-" * 70)
    print("SYNTHESIZED PAIR")
    print("-" * 70)
    report = residual(inst)
    print(f"Samples: {len(inst.f)} for f, {len(inst.g)} for g")
    print(f"Max |<f(x), g(a)> - <x, a>|: {report.max_abs_residual:.3e}")

    print("\n" + "-" * 70)
    print("EXTRACTED CERTIFICATE")
    print("-" * 70)
    dec = extract(inst)
    print(f"rank L = {dec.L.rank}, rank M = {dec.M.rank}")
    print(f"A =\n{np.array2string(dec.A.matrix, precision=4)}")
    verification = verify_decomposition(dec, inst)
    for check in verification.checks:
        status = "ok" if check.passed else "FAIL"
        print(f"  {check.name:<18} {check.value:.3e}  {status}")

    again = synthesize(dec, inst.f.inputs, inst.g.inputs)
    drift = np.max(np.abs(again.f.outputs - inst.f.outputs))
    print(f"Re-synthesis drift on f: {drift:.3e}")

    print("\n" + "-" * 70)
    print("HILBERT SPLIT")
    print("-" * 70)
    hd = hilbert_decompose(inst)
    print(f"rank F1 = {hd.F1.rank}, rank F2 = {hd.F2.rank}, rank F3 = {hd.F3.rank}")
    hilbert = hd.verify(inst)
    print(f"Orthogonality: {hilbert.orthogonality:.3e}")
    print(f"Reconstruction: f {hilbert.f_reconstruction:.3e}, g {hilbert.g_reconstruction:.3e}")

    print("\n" + "=" * 70)
    print("To run the same pipeline from the command line:")
    print("  oeq roundtrip --seed 42 --dims 2 4 --rank-l 3 --rank-m 1 --pairing random-spd")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    demo()
