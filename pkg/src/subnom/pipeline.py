"""End-to-end experiment runners, ingestion, and result emission."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cluster import ClusterConfig, estimate_hierarchy
from .dissim import Dissimilarity, Method1Config, Method2Config, Oracle01Config
from .graph import BlockRef, Graph, HierarchicalFunction, InterestSet, block
from .models import SimModelSpec, build_sim_model, sample_hsbm, sample_sbm, SbmParams
from .nominate import Ranking, block_overlap, rank_subgraphs, top_vertices_recall
from .user import (UserModel, first_affirmative_rerank, partition_labels,
                   rerank, sample_user, select_eta)


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# ---------------------------------------------------------------------------
# Ingestion

@dataclass(frozen=True)
class AttributeTable:
    """Optional per-vertex attributes keyed by dense vertex label 1..n."""

    hemisphere: dict = field(default_factory=dict)
    region: dict = field(default_factory=dict)
    xyz: dict = field(default_factory=dict)


def ingest(edge_path, attribute_path=None):
    """Read `src,dst[,weight]` edges and optional attribute rows.

    String ids map to dense labels 1..n in first-appearance order.
    Returns (Graph, AttributeTable, id_map).
    """
    id_map = {}

    def vid(token):
        token = token.strip()
        if not token:
            raise DataError("empty vertex id")
        if token not in id_map:
            id_map[token] = len(id_map) + 1
        return id_map[token]

    edges = []
    with open(edge_path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (2, 3):
                raise DataError(f"{edge_path}:{lineno}: expected src,dst[,weight]")
            try:
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise DataError(f"{edge_path}:{lineno}: bad weight {parts[2]!r}")
            edges.append((vid(parts[0]), vid(parts[1]), w))
    attrs = AttributeTable()
    if attribute_path is not None:
        hemisphere, region, xyz = {}, {}, {}
        with open(attribute_path) as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or "id" not in reader.fieldnames:
                raise DataError(f"{attribute_path}: missing id column")
            for lineno, row in enumerate(reader, start=2):
                token = (row.get("id") or "").strip()
                if not token:
                    raise DataError(f"{attribute_path}:{lineno}: row missing id")
                v = vid(token)
                if row.get("hemisphere"):
                    hemisphere[v] = row["hemisphere"].strip()
                if row.get("region"):
                    region[v] = row["region"].strip()
                if all(row.get(c) not in (None, "") for c in ("x", "y", "z")):
                    xyz[v] = (float(row["x"]), float(row["y"]), float(row["z"]))
        attrs = AttributeTable(hemisphere=hemisphere, region=region, xyz=xyz)
        for u, v, _ in edges:
            pass  # endpoints were added to id_map on sight; nothing dangling
    n = len(id_map)
    g = Graph.from_edges(n, edges)
    return g, attrs, dict(id_map)


# ---------------------------------------------------------------------------
# Shared plumbing

def write_rows(path, header, rows, fmt="csv"):
    rows = [list(r) for r in rows]
    if fmt == "json":
        payload = [dict(zip(header, r)) for r in rows]
        with open(path, "w") as f:
            json.dump(payload, f, indent=1, sort_keys=True)
            f.write("\n")
        return
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])


def write_manifest(out_dir, config_dict, seed):
    """Reproducibility record: config hash, seed, versions."""
    blob = json.dumps(config_dict, sort_keys=True, default=str)
    digest = hashlib.sha256(blob.encode()).hexdigest()
    manifest = {
        "config": config_dict,
        "config_sha256": digest,
        "seed": seed,
        "subnom_version": __version__,
        "numpy_version": np.__version__,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True, default=str)
        f.write("\n")


def _delta_for(method, seed=0):
    if int(method) == 1:
        return Dissimilarity(kind="method1", config=Method1Config())
    if int(method) == 2:
        return Dissimilarity(kind="method2", config=Method2Config(), seed=seed)
    raise ConfigError(f"method must be 1 or 2, got {method}")


def _max_overlap_block(hhat, level, true_set):
    labels = hhat.level_labels(level)
    m_hat = int(labels.max())
    inter = [len(block(hhat, BlockRef(level, j)) & true_set)
             for j in range(1, m_hat + 1)]
    return int(np.argmax(inter)) + 1


def _self_oracle(target_block_vertices):
    return Dissimilarity(kind="oracle01",
                         interesting_blocks=(frozenset(target_block_vertices),),
                         config=Oracle01Config())


def _user_sweep(ranking, hhat, true_set, reply_counts, scheme, rng):
    """Post-user rankings for each reply count, with nested query prefixes.

    One oracle query tuple is drawn at the largest capacity and each smaller
    count reuses its prefix, so larger reply budgets strictly extend smaller
    ones within a replicate.  Yields (reply_count, ranking) pairs.
    """
    t_max = min(max(reply_counts), ranking.m_hat)
    eta, replies = (), ()
    if t_max > 0:
        model = UserModel.oracle(t_max)
        eta, _skipped = select_eta(ranking, hhat, t_max, rng)
        replies = tuple(sample_user(eta, true_set, model, rng))
    for t_cap in reply_counts:
        t_eff = min(t_cap, t_max)
        if t_eff == 0:
            yield t_cap, ranking
            continue
        eta_t, replies_t = eta[:t_eff], replies[:t_eff]
        if scheme == "first_affirmative":
            yield t_cap, first_affirmative_rerank(ranking, hhat, eta_t, replies_t)
        else:
            i_set, n_set, m_set = partition_labels(ranking, hhat, eta_t, replies_t)
            yield t_cap, rerank(ranking, i_set, n_set, m_set)


# ---------------------------------------------------------------------------
# Simulation study

@dataclass(frozen=True)
class SimulationConfig:
    replicates: int = 100
    seed: int = 0
    method: int = 2
    k1: int = 16
    size_base: float = 20.0
    size_spread: float = 50.0
    cross_p: float = 0.01
    forced_blocks: int = 8
    embed_dim: int = 8
    replies: tuple = (0, 1, 3, 5)
    scheme: str = "first_affirmative"  # or "majority"
    pair_mode: bool = True
    loss_positions: int = 5
    recall_m: int = 25
    threads: int = 1


_SIM_HEADER = ("replicate", "level", "replies", "position_of_true_block",
               "loss_i_t", "recall_at_25", "alpha", "beta")


def _simulate_one(args):
    rep, (entropy, spawn_key), cfg = args
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=entropy, spawn_key=tuple(spawn_key)))
    spec = SimModelSpec(K1=cfg.k1, size_base=cfg.size_base,
                        size_spread=cfg.size_spread, cross_p=cfg.cross_p)
    params, _motifs = build_sim_model(rng, spec)
    g1, h1 = sample_hsbm(params, rng)
    if cfg.pair_mode:
        g2, h2 = sample_hsbm(params, rng)
    else:
        g2, h2 = g1, h1
    j_star = int(rng.integers(1, cfg.k1 + 1))
    t1 = InterestSet.from_refs(h1, [(1, j_star)])
    true_set = block(h2, BlockRef(1, j_star))

    cluster_cfg = ClusterConfig(dim=cfg.embed_dim, n_blocks=cfg.forced_blocks)
    hhat, _est = estimate_hierarchy(g2, cluster_cfg, rng)
    delta = _delta_for(cfg.method, seed=cfg.seed)
    ranking = rank_subgraphs(t1, hhat, g1, g2, delta, level=1)

    ell_star = _max_overlap_block(hhat, 1, true_set)
    oracle_on_target = _self_oracle(block(hhat, BlockRef(1, ell_star)))
    s2 = InterestSet(refs=(BlockRef(1, j_star),), resolved=(true_set,))
    alpha, beta = block_overlap(hhat, h2, s2)

    rows = []
    for t_cap, post in _user_sweep(ranking, hhat, true_set, cfg.replies,
                                   cfg.scheme, rng):
        pos = post.rank_of(ell_star)
        top = min(cfg.loss_positions, post.m_hat)
        loss_val = sum(1.0 for j in post.order[:top] if j != ell_star) / top
        recall = top_vertices_recall(post, hhat, s2, m=cfg.recall_m)
        rows.append((rep, 1, t_cap, pos, loss_val, recall,
                     round(alpha, 12), round(beta, 12)))
    return rows


def run_simulation(cfg: SimulationConfig):
    """Replicated motif-model nomination with an oracle user reply sweep.

    Returns (rows, curves): per-replicate result rows and, per reply count,
    the proportion of replicates whose correct block appeared by rank n.
    """
    if cfg.replicates < 1:
        raise ConfigError("replicates must be >= 1")
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replicates)
    tasks = [(rep, (s.entropy, s.spawn_key), cfg) for rep, s in enumerate(seeds)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(_simulate_one, tasks))
    else:
        chunks = [_simulate_one(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    curves = _hit_proportions(rows, cfg.forced_blocks)
    return rows, curves


def _hit_proportions(rows, m_hat):
    """Curve rows: (replies, position n, proportion found by rank n)."""
    by_replies = {}
    for r in rows:
        by_replies.setdefault(r[2], []).append(r[3])
    out = []
    for t_cap in sorted(by_replies):
        positions = np.array(by_replies[t_cap])
        for n in range(1, m_hat + 1):
            out.append((t_cap, n, float(np.mean(positions <= n))))
    return out


def write_simulation_outputs(out_dir, cfg: SimulationConfig, rows, curves,
                             fmt="csv"):
    os.makedirs(out_dir, exist_ok=True)
    ext = "json" if fmt == "json" else "csv"
    write_rows(os.path.join(out_dir, f"simulation_results.{ext}"),
               _SIM_HEADER, rows, fmt)
    write_rows(os.path.join(out_dir, f"hit_curves.{ext}"),
               ("replies", "position", "proportion"), curves, fmt)
    write_manifest(out_dir, asdict(cfg), cfg.seed)


# ---------------------------------------------------------------------------
# Connectome-style pipeline

@dataclass(frozen=True)
class ConnectomeConfig:
    seed: int = 0
    method: int = 2
    min_region: int = 10
    true_partition: bool = False
    use_features: bool = False
    embed_dim: int = None
    n_blocks: int = None          # None: number of qualifying regions
    replies: tuple = (0, 1, 3)
    scheme: str = "majority"
    recall_m: int = 25
    loss_positions: int = 5


_CONN_HEADER = ("region", "replies", "position_of_true_block", "loss_i_t",
                "recall_at_25", "alpha", "beta")


def _hemisphere_split(attrs: AttributeTable, n):
    left = sorted(v for v in range(1, n + 1) if attrs.hemisphere.get(v) == "L")
    right = sorted(v for v in range(1, n + 1) if attrs.hemisphere.get(v) == "R")
    if not left or not right:
        raise DataError("need vertices in both hemispheres (L and R)")
    return left, right


def run_connectome(g: Graph, attrs: AttributeTable, cfg: ConnectomeConfig):
    """Across-hemisphere region nomination with a user sweep.

    For each region with >= min_region vertices per hemisphere, the left
    instance trains the ranking over a partition of the right hemisphere
    (true regions or a GMM/ASE estimate).  Returns result rows.
    """
    if not attrs.region or not attrs.hemisphere:
        raise DataError("attribute table must provide hemisphere and region")
    left, right = _hemisphere_split(attrs, g.n)
    regions = sorted({attrs.region[v] for v in attrs.region})
    qualifying = []
    for reg in regions:
        nl = sum(1 for v in left if attrs.region.get(v) == reg)
        nr = sum(1 for v in right if attrs.region.get(v) == reg)
        if nl >= cfg.min_region and nr >= cfg.min_region:
            qualifying.append(reg)
    if not qualifying:
        raise DataError(f"no region has >= {cfg.min_region} vertices per hemisphere")

    rng = np.random.default_rng(cfg.seed)
    right_g = g.induced(right)
    right_pos = {v: i + 1 for i, v in enumerate(right)}  # original -> right label

    if cfg.true_partition:
        region_ix = {reg: i + 1 for i, reg in enumerate(regions)}
        labels = np.array([region_ix[attrs.region[v]] for v in right])
        hhat = HierarchicalFunction.single_level(labels)
    else:
        feats = None
        if cfg.use_features:
            if not attrs.xyz:
                raise DataError("use_features requires x,y,z attribute columns")
            feats = np.array([attrs.xyz[v] for v in right])
        n_blocks = cfg.n_blocks or len(qualifying)
        cluster_cfg = ClusterConfig(dim=cfg.embed_dim, n_blocks=n_blocks,
                                    features=feats)
        hhat, _est = estimate_hierarchy(right_g, cluster_cfg, rng)

    delta = _delta_for(cfg.method, seed=cfg.seed)
    rows = []
    for reg in qualifying:
        train_verts = frozenset(v for v in left if attrs.region.get(v) == reg)
        true_right = frozenset(right_pos[v] for v in right
                               if attrs.region.get(v) == reg)
        t1 = InterestSet(refs=(BlockRef(1, regions.index(reg) + 1),),
                         resolved=(train_verts,))
        ranking = rank_subgraphs(t1, hhat, g, right_g, delta, level=1)
        ell_star = _max_overlap_block(hhat, 1, true_right)
        s2 = InterestSet(refs=(BlockRef(1, ell_star),), resolved=(true_right,))
        h_true = HierarchicalFunction.single_level(
            np.array([1 if v in true_right else 2
                      for v in range(1, right_g.n + 1)]))
        s2_true = InterestSet(refs=(BlockRef(1, 1),), resolved=(true_right,))
        alpha, beta = block_overlap(hhat, h_true, s2_true)
        for t_cap, post in _user_sweep(ranking, hhat, true_right, cfg.replies,
                                       cfg.scheme, rng):
            pos = post.rank_of(ell_star)
            top = min(cfg.loss_positions, post.m_hat)
            loss_val = sum(1.0 for j in post.order[:top] if j != ell_star) / top
            recall = top_vertices_recall(post, hhat, s2, m=cfg.recall_m)
            rows.append((reg, t_cap, pos, loss_val, recall,
                         round(alpha, 12), round(beta, 12)))
    return rows


def write_connectome_outputs(out_dir, cfg: ConnectomeConfig, rows, fmt="csv"):
    os.makedirs(out_dir, exist_ok=True)
    ext = "json" if fmt == "json" else "csv"
    write_rows(os.path.join(out_dir, f"connectome_results.{ext}"),
               _CONN_HEADER, rows, fmt)
    write_manifest(out_dir, asdict(cfg), cfg.seed)


def synthetic_connectome(n_regions=4, region_size=12, seed=0, cross_p=0.05):
    """Paired-hemisphere stand-in with the connectome input schema.

    Each region appears once per hemisphere with a shared within-region
    density, so across-hemisphere nomination has signal.  Returns
    (Graph, AttributeTable).
    """
    rng = np.random.default_rng(seed)
    densities = rng.uniform(0.4, 0.9, size=n_regions)
    k = 2 * n_regions  # one block per (hemisphere, region)
    lam = np.full((k, k), cross_p)
    for r in range(n_regions):
        lam[r, r] = densities[r]                      # left copy
        lam[n_regions + r, n_regions + r] = densities[r]  # right copy
    lam = (lam + lam.T) / 2
    sizes = tuple([region_size] * k)
    params = SbmParams(n=region_size * k, K=k, Lambda=lam, fixed_sizes=sizes)
    g, b = sample_sbm(params, rng)
    hemisphere, region, xyz = {}, {}, {}
    centers = rng.uniform(-40, 40, size=(n_regions, 3))
    for v in range(1, g.n + 1):
        blk = int(b[v - 1]) - 1
        hemi = "L" if blk < n_regions else "R"
        r = blk % n_regions
        hemisphere[v] = hemi
        region[v] = f"region_{r + 1}"
        center = centers[r] * np.array([-1 if hemi == "L" else 1, 1, 1])
        xyz[v] = tuple(center + rng.normal(scale=2.0, size=3))
    return g, AttributeTable(hemisphere=hemisphere, region=region, xyz=xyz)
