"""Command-line entry points.

Exit codes: 0 success, 1 configuration error, 2 data error.
"""

from __future__ import annotations

import csv
import json
import os
import sys

import click
import numpy as np

from .cluster import ClusterConfig, estimate_hierarchy
from .graph import InterestSet, read_hierarchy, write_hierarchy
from .nominate import rank_subgraphs
from .pipeline import (ConfigError, ConnectomeConfig, DataError,
                       SimulationConfig, _delta_for, ingest, run_connectome,
                       run_simulation, synthetic_connectome, write_manifest,
                       write_connectome_outputs, write_rows,
                       write_simulation_outputs)
from .theory import heatmap_grid, mc_verify, prob_general


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _merge(config_file_values, **explicit):
    """Config file values override dataclass defaults; CLI flags override both."""
    merged = dict(config_file_values)
    merged.update({k: v for k, v in explicit.items() if v is not None})
    return merged


@click.group()
def main():
    """Hierarchical subgraph nomination toolkit."""


def _run(fn):
    # DataError subclasses ValueError, so it must be caught first.
    try:
        fn()
    except DataError as e:
        click.echo(f"data error: {e}", err=True)
        sys.exit(2)
    except (ConfigError, ValueError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(1)
    except OSError as e:
        click.echo(f"data error: {e}", err=True)
        sys.exit(2)


@main.command()
@click.option("--c", "c", type=int, required=True)
@click.option("--t", "t", type=int, required=True)
@click.option("--h", "h", type=int, required=True)
@click.option("--p", "p", type=float, default=0.0, show_default=True)
@click.option("--q", "q", type=float, default=0.0, show_default=True)
def theory(c, t, h, p, q):
    """Closed-form probability that the true block misses the top h."""
    def go():
        click.echo(f"{prob_general(c, t, h, p, q):.12g}")
    _run(go)


@main.command()
@click.option("--c", "c", type=int, required=True)
@click.option("--t", "t", type=int, required=True)
@click.option("--h", "h", type=int, required=True)
@click.option("--p", "p", type=float, default=0.0, show_default=True)
@click.option("--q", "q", type=float, default=0.0, show_default=True)
@click.option("--reps", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def verify(c, t, h, p, q, reps, seed):
    """Monte Carlo estimate of the same miss probability, with its SE."""
    def go():
        rng = np.random.default_rng(seed)
        est, se = mc_verify(c, t, h, p, q, reps, rng)
        closed = prob_general(c, t, h, p, q)
        click.echo(f"estimate {est:.6f} se {se:.6f} closed_form {closed:.6f}")
    _run(go)


@main.command()
@click.option("--c", "c", type=int, required=True)
@click.option("--p", "p", type=float, default=0.0, show_default=True)
@click.option("--q", "q", type=float, default=0.0, show_default=True)
@click.option("--clip/--no-clip", default=False, show_default=True)
@click.option("--out", type=click.Path(), default="heatmap.csv", show_default=True)
def heatmap(c, p, q, clip, out):
    """Relative-loss grid over (h, t), written as CSV with axis headers."""
    def go():
        grid = heatmap_grid(c, p, q, clip=clip)
        with open(out, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["h\\t"] + list(range(1, c)))
            for h in range(1, c):
                w.writerow([h] + [repr(float(x)) for x in grid[h - 1]])
        click.echo(f"wrote {out}")
    _run(go)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default="sim_out")
@click.option("--threads", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--replicates", type=int, default=None)
@click.option("--method", type=int, default=None)
@click.option("--k1", type=int, default=None)
@click.option("--scheme", type=click.Choice(["first_affirmative", "majority"]),
              default=None)
@click.option("--replies", type=str, default=None,
              help="comma-separated reply counts, e.g. 0,1,3,5")
def simulate(config_path, seed, out, threads, fmt, replicates, method, k1,
             scheme, replies):
    """Run the replicated motif-model nomination study."""
    def go():
        values = _merge(
            _load_config(config_path), seed=seed, threads=threads,
            replicates=replicates, method=method, k1=k1, scheme=scheme,
            replies=tuple(int(x) for x in replies.split(",")) if replies else None)
        if "replies" in values:
            values["replies"] = tuple(values["replies"])
        try:
            cfg = SimulationConfig(**values)
        except TypeError as e:
            raise ConfigError(str(e))
        rows, curves = run_simulation(cfg)
        write_simulation_outputs(out, cfg, rows, curves, fmt=fmt)
        click.echo(f"wrote {out}/simulation_results.{fmt} and hit_curves.{fmt}")
    _run(go)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--edges", type=click.Path(exists=True), default=None)
@click.option("--attrs", "attrs_path", type=click.Path(exists=True), default=None)
@click.option("--synthetic", is_flag=True, default=False,
              help="run on the built-in paired-hemisphere fixture")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default="conn_out")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--method", type=int, default=None)
@click.option("--true-partition/--estimated-partition", "true_partition",
              default=None)
@click.option("--use-features/--no-features", "use_features", default=None)
def connectome(config_path, edges, attrs_path, synthetic, seed, out, fmt,
               method, true_partition, use_features):
    """Across-hemisphere region nomination (real files or synthetic fixture)."""
    def go():
        values = _merge(_load_config(config_path), seed=seed, method=method,
                        true_partition=true_partition, use_features=use_features)
        try:
            cfg = ConnectomeConfig(**{k: tuple(v) if k == "replies" else v
                                      for k, v in values.items()})
        except TypeError as e:
            raise ConfigError(str(e))
        if synthetic:
            g, attrs = synthetic_connectome(seed=cfg.seed)
        else:
            if edges is None or attrs_path is None:
                raise ConfigError("--edges and --attrs required without --synthetic")
            g, attrs, _ids = ingest(edges, attrs_path)
        rows = run_connectome(g, attrs, cfg)
        write_connectome_outputs(out, cfg, rows, fmt=fmt)
        click.echo(f"wrote {out}/connectome_results.{fmt}")
    _run(go)


@main.command()
@click.option("--edges1", type=click.Path(exists=True), required=True)
@click.option("--edges2", type=click.Path(exists=True), required=True)
@click.option("--hierarchy1", type=click.Path(exists=True), required=True)
@click.option("--interest", type=str, required=True,
              help="semicolon-separated level:index pairs, e.g. 1:3;2:5")
@click.option("--hierarchy2", type=click.Path(exists=True), default=None,
              help="known candidate partition; otherwise estimated")
@click.option("--level", type=int, default=1, show_default=True)
@click.option("--method", type=int, default=2, show_default=True)
@click.option("--blocks", type=int, default=None,
              help="forced block count for the estimated partition")
@click.option("--dim", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default="nominate_out")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv")
def nominate(edges1, edges2, hierarchy1, interest, hierarchy2, level, method,
             blocks, dim, seed, out, fmt):
    """Rank the candidate blocks of graph 2 against training blocks of graph 1."""
    def go():
        g1, _a1, ids1 = ingest(edges1)
        g2, _a2, ids2 = ingest(edges2)
        h1 = read_hierarchy(hierarchy1, id_map=ids1)
        try:
            refs = [tuple(int(x) for x in pair.split(":"))
                    for pair in interest.split(";") if pair]
        except ValueError:
            raise ConfigError(f"bad --interest value {interest!r}")
        t1 = InterestSet.from_refs(h1, refs)
        rng = np.random.default_rng(seed)
        if hierarchy2 is not None:
            hhat = read_hierarchy(hierarchy2, id_map=ids2)
        else:
            cluster_cfg = ClusterConfig(dim=dim, n_blocks=blocks)
            hhat, _est = estimate_hierarchy(g2, cluster_cfg, rng)
        delta = _delta_for(method, seed=seed)
        ranking = rank_subgraphs(t1, hhat, g1, g2, delta, level=level)
        os.makedirs(out, exist_ok=True)
        ext = "json" if fmt == "json" else "csv"
        rows = [(r + 1, b, s) for r, (b, s)
                in enumerate(zip(ranking.order, ranking.scores))]
        write_rows(os.path.join(out, f"ranking.{ext}"),
                   ("rank", "block", "score"), rows, fmt)
        write_hierarchy(os.path.join(out, "candidate_hierarchy.csv"), hhat,
                        ids=[t for t, _v in sorted(ids2.items(), key=lambda kv: kv[1])])
        with open(os.path.join(out, "id_map.json"), "w") as f:
            json.dump(ids2, f, indent=1, sort_keys=True)
            f.write("\n")
        write_manifest(out, {
            "edges1": edges1, "edges2": edges2, "hierarchy1": hierarchy1,
            "interest": interest, "hierarchy2": hierarchy2, "level": level,
            "method": method, "blocks": blocks, "dim": dim}, seed)
        click.echo(f"wrote {out}/ranking.{ext}")
    _run(go)


if __name__ == "__main__":  # pragma: no cover
    main()
