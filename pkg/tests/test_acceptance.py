"""Acceptance suite: one test per exit criterion, printed as PASS/FAIL lines.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report.  Every tolerance is pinned here; the Monte Carlo criteria are
deterministic given the fixed master seeds.
"""

import json
import time

import numpy as np

import brute
from qcsradar.ambiguity import ambiguity_holds, ambiguity_report, build_pair
from qcsradar.cli import main as cli_main
from qcsradar.evaluation import ExperimentConfig, GridPoint, _aggregate_point, run_trial
from qcsradar.quantization import QuantizerConfig, adapted_quantizer, draw_dither, quantize_complex, sense
from qcsradar.recovery import consistency, hard_threshold
from qcsradar.seeding import derive_seed, generator
from qcsradar.signal_model import adjoint, forward, make_sampling_plan, random_profile

MASTER_SEED = 0


def _report(number: int, description: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {description} [{detail}]")
    assert ok, f"criterion {number}: {description}: {detail}"


def mean_tpr(sparsity, bit_depth, bitrate, dithered, algorithm, trials, seed=MASTER_SEED):
    config = ExperimentConfig(
        sparsities=(sparsity,),
        bit_depths=(bit_depth,),
        bitrates=(bitrate,),
        dithered=dithered,
        algorithm=algorithm,
        trials=trials,
        master_seed=seed,
    )
    point = GridPoint(sparsity, bit_depth, bitrate, dithered, algorithm)
    return _aggregate_point(config, point).mean_tpr_pct


def test_criterion_01_dithered_pbp_reference_level():
    start = time.monotonic()
    value = mean_tpr(2, 1, 8192, True, "pbp", trials=2000)
    elapsed = time.monotonic() - start
    ok = abs(value - 98.9) <= 2.0 and elapsed < 300.0
    _report(
        1,
        "dithered 1-bit PBP, K=2, bitrate 2^13, 2000 trials: mean TPR 98.9 +- 2",
        ok,
        f"TPR={value:.2f}%, {elapsed:.0f}s",
    )


def test_criterion_02_undithered_pbp_saturation():
    values = {
        rate: mean_tpr(2, 1, rate, False, "pbp", trials=300)
        for rate in (256, 512, 1024, 2048, 4096, 8192)
    }
    level_ok = all(abs(v - 77.6) <= 3.0 for v in values.values())
    spread = max(values.values()) - min(values.values())
    ok = level_ok and spread <= 2.0
    _report(
        2,
        "undithered 1-bit PBP plateau, K=2, bitrates 2^8..2^13: 77.6 +- 3, pairwise <= 2",
        ok,
        "TPR=" + "/".join(f"{values[r]:.2f}" for r in sorted(values)) + f", spread={spread:.2f}",
    )


def test_criterion_03_qiht_high_bitrate():
    dithered = mean_tpr(2, 1, 8192, True, "qiht", trials=500)
    undithered = mean_tpr(2, 1, 8192, False, "qiht", trials=1000)
    ok = dithered >= 98.0 and abs(undithered - 87.3) <= 3.0
    _report(
        3,
        "1-bit QIHT, K=2, bitrate 2^13: dithered >= 98, undithered 87.3 +- 3",
        ok,
        f"dithered={dithered:.2f}%, undithered={undithered:.2f}%",
    )


def test_criterion_04_qiht_sparsity_sweep():
    high = mean_tpr(10, 1, 8192, True, "qiht", trials=500)
    ok = abs(high - 99.0) <= 2.0
    details = [f"K=10@2^13={high:.2f}%"]

    # bitrate 2^9 sweep; the +-3 tolerance absorbs Monte Carlo spread in the
    # pairwise comparisons
    sweep = {}
    for k in (2, 4, 6, 8, 10):
        sweep[k] = (
            mean_tpr(k, 1, 512, True, "qiht", trials=500),
            mean_tpr(k, 1, 512, False, "qiht", trials=500),
            mean_tpr(k, 1, 512, True, "pbp", trials=500),
        )
    for k, (qd, qu, pd) in sweep.items():
        ok = ok and qd >= qu - 1.0 - 3.0
        if k >= 4:
            ok = ok and qd > pd - 3.0
    qd10, _, pd10 = sweep[10]
    ok = ok and abs(qd10 - 85.35) <= 3.0 and abs(pd10 - 55.29) <= 3.0
    details.append(
        "2^9: " + " ".join(f"K{k}:{qd:.1f}/{qu:.1f}/{pd:.1f}" for k, (qd, qu, pd) in sweep.items())
    )
    _report(
        4,
        "1-bit QIHT K=10 @2^13 = 99 +- 2; @2^9 dithered >= undithered - 1 and above dithered PBP (+-3)",
        ok,
        "; ".join(details),
    )


def test_criterion_05_quantity_beats_quality():
    quantized = mean_tpr(2, 1, 512, True, "qiht", trials=500)
    full_res = mean_tpr(2, None, 512, False, "pbp", trials=500)
    margin = quantized - full_res
    ok = margin >= 5.0
    _report(
        5,
        "at bitrate 2^9, dithered 1-bit QIHT beats unquantized PBP by >= 5 points",
        ok,
        f"QIHT(1-bit,M=512)={quantized:.2f}% vs PBP(unquantized,M=16)={full_res:.2f}%, margin={margin:.1f}",
    )


def test_criterion_06_ambiguity_soundness():
    n_bins, n_meas = 256, 1024
    plan = make_sampling_plan(n_bins, n_meas, derive_seed(MASTER_SEED, "c6-plan"))
    rng = generator(derive_seed(MASTER_SEED, "c6-draws"))
    gamma = 0.5
    holds = 0
    draws = 1000
    for _ in range(draws):
        bin_extra = 64
        while bin_extra == 64:
            bin_extra = int(rng.integers(1, n_bins + 1))
        psi1 = float(rng.uniform(-np.pi, np.pi))
        pair = build_pair(n_bins, 64, bin_extra, np.pi / 4, psi1, gamma)
        peak = max(
            float(np.max(np.abs(forward(plan, pair.base)))),
            float(np.max(np.abs(forward(plan, pair.alternate)))),
        )
        if ambiguity_holds(plan, QuantizerConfig(1, peak), pair, dither=None):
            holds += 1
    report = ambiguity_report(
        n_bins=n_bins, bin_base=64, bin_extra=10, phase_base=np.pi / 4, phase_extra=0.0,
        gamma=gamma, n_meas=n_meas, n_seeds=200, seed=MASTER_SEED,
    )
    ok = holds == draws and report["dithered_AC_rate"] < 0.05
    _report(
        6,
        "undithered 1-bit ambiguity holds for 1000 random (n1, psi1); dither rate < 5% over 200 seeds",
        ok,
        f"undithered {holds}/{draws}, dithered rate {report['dithered_AC_rate']:.3f}",
    )


def test_criterion_07_quantizer_algebra():
    delta_range = 1.3
    cfg = QuantizerConfig(1, delta_range)
    lams = np.linspace(-delta_range, delta_range, 10_002)[1:-1]
    q = quantize_complex(cfg, lams + 0j).real
    sign_ok = bool(np.array_equal(2 * q / delta_range, np.sign(lams)))

    rng = np.random.default_rng(derive_seed(MASTER_SEED, "c7"))
    grid_ok = True
    mono_ok = True
    for b in (1, 2, 4, 8):
        c = QuantizerConfig(b, 0.9)
        v = rng.normal(size=2000) + 1j * rng.normal(size=2000)
        out = quantize_complex(c, v)
        for part in (out.real, out.imag):
            cells = (part - c.step / 2) / c.step
            grid_ok = grid_ok and bool(
                np.all(np.abs(cells - np.round(cells)) <= 1e-12 * (1 + np.abs(cells)))
            )
        ordered = np.sort(rng.uniform(-3, 3, size=2000))
        mono_ok = mono_ok and bool(np.all(np.diff(quantize_complex(c, ordered + 0j).real) >= 0))

    n = 10_000
    cfg1 = QuantizerConfig(1, 2.0)
    delta = cfg1.step
    lam_grid = np.linspace(-0.9, 0.9, 100)
    xi = rng.uniform(-delta / 2, delta / 2, size=(lam_grid.size, n))
    means = quantize_complex(cfg1, lam_grid[:, None] + xi + 0j).real.mean(axis=1)
    unbiased_frac = float(np.mean(np.abs(means - lam_grid) <= 4 * delta / np.sqrt(n)))
    unbiased_ok = unbiased_frac >= 0.99

    ok = sign_ok and grid_ok and mono_ok and unbiased_ok
    _report(
        7,
        "quantizer algebra: sign identity, grid membership, monotonicity, dither unbiasedness",
        ok,
        f"sign={sign_ok}, grid={grid_ok}, monotone={mono_ok}, unbiased_frac={unbiased_frac:.2f}",
    )


def test_criterion_08_error_decay():
    trials = 500
    medians = {}
    for m in (1024, 4096):
        point = GridPoint(2, 1, m, True, "pbp")
        errors = [
            run_trial(point, t, MASTER_SEED).l2_error for t in range(trials)
        ]
        medians[m] = float(np.median(errors))
    ratio = medians[4096] / medians[1024]
    ok = ratio <= 0.6
    _report(
        8,
        "dithered 1-bit PBP error decay: median l2 at M=4096 <= 0.6 x median at M=1024",
        ok,
        f"median(1024)={medians[1024]:.4f}, median(4096)={medians[4096]:.4f}, ratio={ratio:.3f}",
    )


def test_criterion_09_bruteforce_oracle_equivalence():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, "c9"))
    instances = 1000
    worst = 0.0
    discrete_ok = True
    for i in range(instances):
        n = int(rng.integers(2, 17))
        m = int(rng.integers(1, 25))
        k = int(rng.integers(1, n + 1))
        plan = make_sampling_plan(n, m, seed=int(rng.integers(1 << 31)))
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        y = rng.normal(size=m) + 1j * rng.normal(size=m)

        fwd = forward(plan, a)
        worst = max(worst, float(np.max(np.abs(fwd - brute.forward_loop(plan.omega, a, n)))))
        adj_brute = brute.adjoint_loop(plan.omega, y, n)
        worst = max(worst, float(np.max(np.abs(adjoint(plan, y) - adj_brute))))

        ht = hard_threshold(a, k)
        discrete_ok = discrete_ok and bool(
            np.array_equal(ht, brute.hard_threshold_sorted(list(a), k))
        )

        profile = random_profile(n, k, rng=int(rng.integers(1 << 31)))
        raw = forward(plan, profile)
        quantizer = adapted_quantizer(raw, 1, dithered=True)
        dither = draw_dither(quantizer, m, seed=int(rng.integers(1 << 31)))
        yq = sense(plan, quantizer, dither, profile)
        estimate = random_profile(n, k, rng=int(rng.integers(1 << 31)))
        got = consistency(plan, quantizer, dither, yq, estimate)
        want = brute.consistency_loop(
            plan.omega, n, quantizer.step, dither.values, yq, estimate.amplitudes
        )
        discrete_ok = discrete_ok and got == want

    ok = worst <= 1e-10 and discrete_ok
    _report(
        9,
        "forward/adjoint within 1e-10 of brute force; hard_threshold & consistency exact (1000 instances)",
        ok,
        f"worst numeric deviation {worst:.2e}, discrete match {discrete_ok}",
    )


def test_criterion_10_capture_replay_round_trip(tmp_path, capsys):
    # lab-scale hardware runs are out of reach; the substituted check mirrors
    # the 196-run campaign with synthetic captures replayed through the CLI
    runs = 196
    total_tpr = 0.0
    for i in range(runs):
        out = tmp_path / f"cap_{i}.iq"
        code = cli_main(
            [
                "gen-capture", "--out", str(out), "--n", "256", "--meas", "8192",
                "--bits", "1", "--sparsity", "2", "--seed", str(100_000 + i),
            ]
        )
        truth = json.loads(capsys.readouterr().out)
        assert code == 0
        code = cli_main(
            ["recover", "--capture", str(out), "--algo", "qiht", "--sparsity", "2"]
        )
        estimate = json.loads(capsys.readouterr().out)
        assert code == 0
        common = set(truth["support_indices"]) & set(estimate["support_indices"])
        total_tpr += len(common) / 2
        out.unlink()
        (tmp_path / f"cap_{i}.iq.json").unlink()
    mean = 100.0 * total_tpr / runs
    ok = mean >= 95.0
    with capsys.disabled():
        _report(
            10,
            "196 synthetic gen-capture -> recover runs (1-bit dithered, bitrate 2^13): mean TPR >= 95%",
            ok,
            f"mean TPR {mean:.2f}%",
        )
