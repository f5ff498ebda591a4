#!/usr/bin/env python3
"""
Full-size acceptance run: one section per criterion, pass/fail and timing per section.

Usage: python run_acceptance.py [--quick] [--pins acceptance_pins.json]
"""
import argparse
import json
import math
import os
import tempfile
import time

import networkx as nx
import numpy as np
from dotenv import load_dotenv

from cli_reports import main as cli_main
from convexity_lab import (
    PointMap, ball_convexity_check, clarkson_check, diamond_convexity_ratio, enflo_type_check,
    impossibility_certificate, laakso_canonical_chain, markov_convexity_monte_carlo, markov_convexity_ratio,
    martingale_cotype_check, random_martingale, roundness_check,
)
from errors import GeolabError
from graph_factory import diamond, distortion, l1_embed, laakso, shortest_path_metric
from io_utils import write_json
from lewis_solver import MODES, SolverConfig, certify_lewis, diagonal_subspace, grad_psi, psi, random_subspace, solve_lewis
from spectral_core import (
    find_contraction_counterexample, holder_check, loewner_contraction_check, von_neumann_check,
)
from sq_embedding import beta_bound_check, build_embedding, certify_lower, certify_upper, hypercube_distortion

load_dotenv()

PIN_BAND = 0.05


def section(number, title):
    print(f"📋 Test {number}: {title}")


def report(ok, message):
    print(f"   {'✅' if ok else '❌'} {message}")
    return ok


def lewis_grid():
    """(seed, k, m, p) for the 50 random certification cases; m * m >= k always."""
    return [(seed, 1 + seed % 5, 3 + seed % 6, (1.0, 1.5, 2.0, 3.0)[seed % 4]) for seed in range(50)]


def lewis_certification(scale):
    failures = 0
    for mode in MODES:
        for seed, k, m, p in lewis_grid():
            try:
                cert = solve_lewis(random_subspace(k, m, p, seed), SolverConfig(seed=seed, mode=mode))
                residuals = certify_lewis(cert, p)
                failures += residuals.worst > 1e-6
            except GeolabError as e:
                print(f"      {mode} seed {seed}: {e}")
                failures += 1
    return report(failures == 0, f"50 random subspaces certified in both modes, {failures} failure(s)")


def gradient_correctness(scale):
    worst = 0.0
    h = 1e-5
    for p in (1.0, 1.5, 3.0):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            basis = random_subspace(3, 4, p, seed)
            B = rng.standard_normal((3, 3)) + 3 * np.eye(3)
            g = grad_psi(B, basis)
            numeric = np.zeros_like(g)
            for u in range(3):
                for t in range(3):
                    E = np.zeros((3, 3))
                    E[u, t] = h
                    numeric[u, t] = (psi(B + E, basis) - psi(B - E, basis)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(numeric - g)) / max(1.0, np.max(np.abs(g)))))
    return report(worst <= 1e-4, f"worst relative finite-difference gap {worst:.2e}")


def embedding_bounds(scale):
    violations = 0
    samples = max(100, 1000 // scale)
    for seed, (p, q) in enumerate(((1.0, 1.5), (1.0, 2.0), (1.5, 3.0), (2.0, 3.0))):
        cert = solve_lewis(random_subspace(3, 4, p, seed), SolverConfig(seed=seed))
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            A = np.tensordot(rng.standard_normal(3), cert.basis, axes=1)
            violations += not certify_lower(A, cert, p, q).holds
            violations += not certify_upper(A, cert, p, q).holds
            check = beta_bound_check(A, cert, p, rng.uniform(0.05, 0.5))
            violations += not (check.holds and check.psd_order_holds)
    return report(violations == 0, f"{violations} violation(s) over {4 * samples} elements per bound")


def sharpness(scale):
    ok = True
    for k in range(2, 7):
        emb, _ = build_embedding(diagonal_subspace(k, 1.0), 2.0, solver=SolverConfig(tol=1e-12), probes=100)
        value = hypercube_distortion(emb)
        ok &= report(abs(value - math.sqrt(k)) <= 1e-9, f"k={k}: hypercube distortion {value:.12f} vs sqrt(k)")
    return ok


def inequality_suite(scale):
    trials = max(100, 10000 // scale)
    rng = np.random.default_rng(7)
    counts = dict.fromkeys(('von Neumann', 'Holder', 'contraction', 'Clarkson', 'roundness', 'Ball', 'Enflo'), 0)
    for _ in range(trials):
        S, T = rng.standard_normal((2, 4, 4))
        counts['von Neumann'] += not von_neumann_check(S, T).holds
        a, b = rng.uniform(1.0, 4.0, size=2)
        counts['Holder'] += not holder_check(S, T, a, b).holds
        G, h = rng.standard_normal((3, 3)), rng.standard_normal((3, 1))
        counts['contraction'] += not loewner_contraction_check(G @ G.T, G @ G.T + h @ h.T, rng.uniform(0.01, 0.5)).holds
        q = rng.uniform(1.0, 2.0)
        counts['Clarkson'] += not clarkson_check(q, S, T).holds
        counts['roundness'] += not roundness_check(q, *rng.standard_normal((4, 3, 3))).holds
        counts['Ball'] += not ball_convexity_check(rng.uniform(1.05, 2.0), S, T).holds
        counts['Enflo'] += not enflo_type_check(q, rng.standard_normal((8, 3, 3))).holds
    ok = True
    for name, bad in counts.items():
        ok &= report(bad == 0, f"{name}: {bad} violation(s) in {trials} trials")
    bad = sum(not martingale_cotype_check(rng.uniform(1.1, 2.0), random_martingale(4, 3, rng)).holds for _ in range(200))
    ok &= report(bad == 0, f"martingale cotype: {bad} violation(s) in 200 trials")
    search = find_contraction_counterexample(beta=1.0, trials=2000, seed=0)
    ok &= report(search.found, f"beta=1 contraction counterexample found: value {search.value:.6f}")
    return ok


def graph_counts(scale):
    ok = True
    for kind, build, kmax, branching, added, base in (
        ('diamond', diamond, 6, 4, 2, 2), ('laakso', laakso, 5, 6, 4, 4),
    ):
        vertices, edges = 2, 1
        for k in range(1, kmax + 1):
            g = build(k)
            height = nx.shortest_path_length(g.graph, g.source, g.sink)
            ok &= report(
                (g.n, len(g.edges), height) == (vertices, edges, base ** (k - 1)),
                f"{kind}({k}): |V|={g.n} |E|={len(g.edges)} source-sink {height}",
            )
            vertices, edges = vertices + added * edges, edges * branching
    return ok


def l1_embeddings(scale):
    ok = True
    for kind, build, kmax in (('diamond', diamond, 4), ('laakso', laakso, 3)):
        for k in range(1, kmax + 1):
            g = build(k)
            value = distortion(l1_embed(g), shortest_path_metric(g)).value
            ok &= report(value <= 2 + 1e-9, f"{kind}({k}): l1 distortion {value:.6f}")
    return ok


def markov_growth(scale, pins_path):
    ok = True
    values = {}
    for k in (2, 3, 4):
        canonical = laakso_canonical_chain(k)
        r = markov_convexity_ratio(canonical.chain, canonical.f, canonical.metric)
        values[k] = r.pi2_lower
        ok &= report(r.truncation_error_bound <= 1e-6 * r.lhs,
                     f"L_{k}: pi2_lower {r.pi2_lower:.6f}, remainder {r.truncation_error_bound:.2e}")
    ok &= report(values[2] < values[3] < values[4], "pi2_lower strictly increasing in k")

    ratios = {str(k): v / math.sqrt(k) for k, v in values.items()}
    if os.path.exists(pins_path):
        with open(pins_path) as fh:
            pins = json.load(fh).get('pi2_over_sqrt_k', {})
        for k, value in ratios.items():
            if k in pins:
                ok &= report(abs(value - pins[k]) <= PIN_BAND * pins[k], f"L_{k}: pi2/sqrt(k) {value:.6f} vs pin {pins[k]:.6f}")
    else:
        write_json(pins_path, {'pi2_over_sqrt_k': ratios})
        report(True, f"pins written to {pins_path}")

    canonical = laakso_canonical_chain(2)
    exact = markov_convexity_ratio(canonical.chain, canonical.f, canonical.metric)
    mc = markov_convexity_monte_carlo(canonical.chain, canonical.f, canonical.metric, samples=1000000 // scale, seed=11)
    ok &= report(abs(mc.lhs - exact.lhs) <= 3 * mc.lhs_se + 1e-12 and abs(mc.rhs - exact.rhs) <= 3 * mc.rhs_se + 1e-12,
                 f"Monte Carlo lhs {mc.lhs:.6f}±{mc.lhs_se:.1e} vs exact {exact.lhs:.6f}")
    return ok


def diamond_identity(scale):
    g = diamond(2)
    r = diamond_convexity_ratio(PointMap.identity(g.n), g, shortest_path_metric(g))
    return report((r.lhs, r.rhs, r.ratio) == (4.0, 4.0, 1.0), f"D_2: lhs {r.lhs:g}, rhs {r.rhs:g}, ratio {r.ratio:g}")


def end_to_end(scale):
    c2, c3 = impossibility_certificate(2, 1.0), impossibility_certificate(3, 1.0)
    ok = report(c3.log_dim_lower_bound > c2.log_dim_lower_bound, "bound increases from k=2 to k=3")
    ratio = impossibility_certificate(3, 10.0).log_dim_lower_bound / impossibility_certificate(3, 5.0).log_dim_lower_bound
    ok &= report(abs(ratio - 0.25) <= 1e-12, f"alpha 10 vs 5 exponent ratio {ratio:.12f}")
    outputs = []
    for _ in range(2):
        out = tempfile.mkdtemp(prefix='geolab-')
        code = cli_main(['certificate', '--k', '3', '--alpha', '1', '--out', out, '--no-timestamp'])
        ok &= report(code == 0, f"certificate command exit code {code}")
        outputs.append({name: open(os.path.join(out, name), 'rb').read() for name in sorted(os.listdir(out))})
    return ok & report(outputs[0] == outputs[1], "byte-identical reruns")


def main():
    parser = argparse.ArgumentParser(description='geolab acceptance run')
    parser.add_argument('--quick', action='store_true', help='reduced trial counts')
    parser.add_argument('--pins', default='acceptance_pins.json')
    args = parser.parse_args()
    scale = 10 if args.quick else 1

    print("=" * 60)
    print("🔍 GEOLAB ACCEPTANCE")
    print("=" * 60)
    print()

    sections = [
        ("Lewis certification", lewis_certification),
        ("Gradient correctness", gradient_correctness),
        ("Embedding bounds", embedding_bounds),
        ("Sharpness on diagonal l1^k", sharpness),
        ("Matrix inequality suite", inequality_suite),
        ("Graph counts", graph_counts),
        ("l1 embeddings", l1_embeddings),
        ("Markov convexity growth", lambda s: markov_growth(s, args.pins)),
        ("Diamond convexity of D_2", diamond_identity),
        ("End-to-end certificate", end_to_end),
    ]
    results = []
    for number, (title, run) in enumerate(sections, start=1):
        section(number, title)
        start = time.perf_counter()
        try:
            ok = bool(run(scale))
        except GeolabError as e:
            ok = report(False, str(e))
        print(f"   ⏱  {time.perf_counter() - start:.1f}s")
        print()
        results.append(ok)

    print("=" * 60)
    passed = sum(results)
    print(f"{'✅' if passed == len(results) else '❌'} {passed}/{len(results)} sections passed")
    print("=" * 60)
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
