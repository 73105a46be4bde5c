"""Per-level verification pipelines shared by the CLI and the acceptance suite."""

from __future__ import annotations

from fractions import Fraction

from .config import Level, RunConfig
from .crossed import ActionInstance, crossed_commutator
from .folner import (
    FolnerSet,
    Tiling,
    TilingError,
    boundary_ratio_str,
    certify_tiling,
    complete_tile,
    folner_box,
    separating_subgroup,
    verify_tiling,
)
from .groups import Group, GroupElement, word_ball
from .linalg import fraction_str
from .projection import (
    CertificateError,
    build_phi,
    build_projection,
    coset_sum,
    coset_variation,
    lambda_commutator_norm,
    lambda_envelope,
    NORM_SLACK,
)


def num(x: float) -> float:
    """Round to 12 significant digits for reports."""
    return float(f"{x:.12g}")


def build_level(G: Group, level: Level, index_cap: int) -> tuple[FolnerSet, Tiling, str]:
    F = folner_box(G, level.box)
    if level.subgroup is None:
        L = separating_subgroup(F, index_cap=index_cap)
        source = "search"
    else:
        L = G.subgroup(level.subgroup)
        source = "configured"
    if level.tile is not None:
        T = certify_tiling((G.element(G.nf_from_json(k)) for k in level.tile), L, F)
    else:
        T = complete_tile(F, L, index_cap)
    return F, T, source


def tile_record(G: Group, level: Level, cfg: RunConfig) -> tuple[dict, Tiling]:
    F, T, source = build_level(G, level, cfg.index_cap)
    window = sorted(word_ball(G, cfg.verify_radius))
    try:
        verify_tiling(T, window)
    except TilingError:
        T.certificate["window_verified"] = False
    rec = {
        "n": level.n,
        "folner_size": len(F),
        "subgroup": T.subgroup.params(),
        "subgroup_source": source,
        "index": T.index,
        "tile_size": len(T.tile),
        "window_size": len(window),
        "certificate": dict(T.certificate),
        "passed": all(T.certificate.values()),
    }
    return rec, T


def coset_identity_checks(phi, generators: list[GroupElement]) -> dict:
    """Exact coset sums and coset variations for every label in K."""
    T = phi.tiling
    sums_ok = all(coset_sum(phi, y) == 1 for y in T.tile)
    variations = {}
    variation_ok = True
    for s in generators:
        worst = Fraction(0)
        for y in T.tile:
            try:
                worst = max(worst, coset_variation(phi, y, s))
            except CertificateError:
                variation_ok = False
        variations[generator_label(s)] = fraction_str(worst)
    return {"coset_sums_exact": sums_ok, "variation_within_ratio": variation_ok, "max_variation": variations}


def lambda_record(G: Group, level: Level, cfg: RunConfig) -> tuple[dict, list[dict]]:
    F, T, source = build_level(G, level, cfg.index_cap)
    phi = build_phi(F, T)
    identities = coset_identity_checks(phi, cfg.generators)
    P = build_projection(phi)
    gens = []
    rows = []
    for s in cfg.generators:
        norm = lambda_commutator_norm(s, P, dense_threshold=cfg.dense_threshold, check=False)
        env = lambda_envelope(F, s)
        ratio = boundary_ratio_str(F, s)
        within = norm <= env + NORM_SLACK
        gens.append(
            {
                "generator": s.to_json(),
                "ratio": ratio,
                "norm": num(norm),
                "envelope": num(env),
                "within_envelope": within,
            }
        )
        rows.append(
            {
                "n": level.n,
                "|F|": len(F),
                "|K|": len(T.tile),
                "index": T.index,
                "generator": generator_label(s),
                "ratio": ratio,
                "norm": f"{norm:.12g}",
                "envelope": f"{env:.12g}",
            }
        )
    laws = {
        "gram_defect": num(P.gram_defect()),
        "idempotence_defect": num(P.idempotence_defect()),
        "trace": num(P.trace()),
        "rank": P.rank,
    }
    laws_ok = laws["gram_defect"] <= 1e-12 and laws["idempotence_defect"] <= 1e-10 and abs(P.trace() - P.rank) <= 1e-9
    rec = {
        "n": level.n,
        "folner_size": len(F),
        "tile_size": len(T.tile),
        "index": T.index,
        "subgroup": T.subgroup.params(),
        "subgroup_source": source,
        "window_size": len(P.window),
        "coset_identities": identities,
        "projection": laws,
        "generators": gens,
        "passed": identities["coset_sums_exact"]
        and identities["variation_within_ratio"]
        and laws_ok
        and all(g["within_envelope"] for g in gens),
    }
    return rec, rows


def crossed_record(G: Group, level: Level, cfg: RunConfig, inst: ActionInstance) -> tuple[dict, list[dict]]:
    F, T, source = build_level(G, level, cfg.index_cap)
    P = build_projection(build_phi(F, T))
    Q = cfg.q_projection(level.n, inst.algebra.dim)
    elements = []
    rows = []
    for label, a in zip(inst.labels, inst.test_elements):
        rep = crossed_commutator(a, inst.action, Q, P, n=level.n, dense_threshold=cfg.dense_threshold)
        entry = {
            "element": label,
            "defect": num(rep.defect),
            "norm": num(rep.full_norm),
            "max_block_norm": num(rep.max_block_norm),
            "max_q_commutator": num(rep.max_q_commutator),
            "proof_bound": num(rep.proof_bound),
            "orthogonality_residual": num(rep.orthogonality_residual),
            "overlapping_block_pairs": rep.overlapping_pairs,
            "norm_equals_max_block": rep.norm_matches_max_block,
            "blocks_orthogonal": rep.blocks_orthogonal,
            "within_proof_bound": rep.within_proof_bound,
            "per_block_chain": rep.per_block_chain,
            "terms_within_1_over_n": rep.terms_within_one_over_n,
            "within_4_over_n": rep.within_four_over_n,
            "passed": rep.passed,
        }
        elements.append(entry)
        rows.append(
            {
                "n": level.n,
                "index": T.index,
                "element": label,
                "defect": f"{rep.defect:.12g}",
                "norm": f"{rep.full_norm:.12g}",
                "max_block_norm": f"{rep.max_block_norm:.12g}",
                "proof_bound": f"{rep.proof_bound:.12g}",
                "orthogonality_residual": f"{rep.orthogonality_residual:.12g}",
                "passed": rep.passed,
            }
        )
    rec = {
        "n": level.n,
        "folner_size": len(F),
        "tile_size": len(T.tile),
        "index": T.index,
        "subgroup": T.subgroup.params(),
        "subgroup_source": source,
        "q_projection": "identity" if Q is None else "configured",
        "elements": elements,
        "passed": all(e["passed"] for e in elements),
    }
    return rec, rows


def generator_label(s: GroupElement) -> str:
    return ",".join(str(v) for v in _flat(s.to_json()))


def _flat(obj):
    if isinstance(obj, (list, tuple)):
        for x in obj:
            yield from _flat(x)
    else:
        yield obj
