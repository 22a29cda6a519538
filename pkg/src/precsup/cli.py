"""Command-line driver: experiment orchestration, data ingestion, result
serialization.

Commands: generate | recover | evaluate | theory | ingest. A config file
of key=value lines can seed any option; explicit flags override it. All
outputs are plain CSV/JSON with deterministic content (no timestamps),
so identical configurations reproduce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import click
import numpy as np

from .errors import ConvergenceError
from .matcore import read_dense_csv, read_triplet_csv, write_dense_csv, write_triplet_csv
from .metrics import SupportMask, fp_rate, tp_rate
from .pipeline import recover_support
from .subsampling import (binomial_fp_bound, partition_sample, per_subsample_alpha,
                          write_votes_csv)
from .support_search import calibrated_steps_for_alpha
from .synthdata import (make_binary_tree, make_block_diagonal, make_tridiagonal,
                        sample_gaussian, sample_laplace)
from .theory_lab import lazy_hoeffding_tail, shrink_ratio_experiment, sparse_opnorm_scaling

DEFAULT_ALPHA_GRID = [2.0 ** -j for j in range(1, 11)]


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(flag_value, cfg: dict, key: str, default=None, cast=None):
    """Flag beats config beats default."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        raw = cfg[key]
        return cast(raw) if cast else raw
    return default


def _resolve_alphas(flag_values, cfg: dict) -> list[float]:
    if flag_values:
        return [float(a) for a in flag_values]
    if "alpha" in cfg:
        return [float(a) for a in cfg["alpha"].split(",") if a.strip()]
    return list(DEFAULT_ALPHA_GRID)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_support_csv(path: Path, mask: SupportMask) -> None:
    write_triplet_csv(path, mask.mask.astype(np.float64))


def _trace_prefix_dict(trace, steps: int) -> dict:
    return {
        "gamma": trace.gamma,
        "steps": steps,
        "records": [{"s": r.s, "r": r.r, "r_prime": r.r_prime, "t": r.t,
                     "nonzeros": r.nonzeros} for r in trace.records[:steps]],
        "alpha": trace.gamma ** (-steps),
    }


@click.group()
def main():
    """Sparse precision-matrix support recovery with false-positive-rate
    control: synthetic experiments, recovery runs, and theory checks."""


@main.command()
@click.option("--model", type=click.Choice(["tridiag", "tree", "block"]), default=None)
@click.option("--p", type=int, default=None, help="Dimension (tridiag model).")
@click.option("--depth", type=int, default=None, help="Tree depth (tree model).")
@click.option("--blocks", type=int, default=None, help="Block count (block model).")
@click.option("--block-size", type=int, default=None, help="Block size (block model).")
@click.option("--n", type=int, default=None, help="Sample size.")
@click.option("--seed", type=int, default=None)
@click.option("--dist", type=click.Choice(["gaussian", "laplace"]), default=None)
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--config", type=click.Path(exists=True), default=None)
def generate(model, p, depth, blocks, block_size, n, seed, dist, out, config):
    """Write a synthetic sample, its ground-truth support, and a manifest."""
    cfg = _load_config(config)
    model = _resolve(model, cfg, "model")
    n = _resolve(n, cfg, "n", cast=int)
    seed = _resolve(seed, cfg, "seed", default=0, cast=int)
    dist = _resolve(dist, cfg, "dist", default="gaussian")
    out = _resolve(out, cfg, "out")
    if model is None or n is None or out is None:
        raise click.ClickException("generate needs --model, --n and --out")

    if model == "tridiag":
        p = _resolve(p, cfg, "p", cast=int)
        if p is None:
            raise click.ClickException("tridiag model needs --p")
        gm = make_tridiagonal(p)
    elif model == "tree":
        depth = _resolve(depth, cfg, "depth", cast=int)
        if depth is None:
            raise click.ClickException("tree model needs --depth")
        gm = make_binary_tree(depth)
    else:
        blocks = _resolve(blocks, cfg, "blocks", cast=int)
        block_size = _resolve(block_size, cfg, "block_size", cast=int)
        if blocks is None or block_size is None:
            raise click.ClickException("block model needs --blocks and --block-size")
        gm = make_block_diagonal(blocks, block_size)

    sampler = sample_gaussian if dist == "gaussian" else sample_laplace
    sample = sampler(gm, n, seed)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_dense_csv(out_dir / "data.csv", sample.X)
    write_triplet_csv(out_dir / "truth.csv", gm.matrix)
    _write_json(out_dir / "manifest.json", {
        "command": "generate",
        "model": {"kind": gm.kind, **gm.params, "off_value": gm.off_value},
        "n": n,
        "p": gm.dim,
        "seed": seed,
        "distribution": dist,
        "files": {"data": "data.csv", "truth": "truth.csv"},
    })
    click.echo(f"wrote {out_dir}/data.csv ({n} x {gm.dim}) + truth + manifest")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), default=None,
              help="Input data CSV (n rows, p columns).")
@click.option("--lambda", "lam", type=float, default=None,
              help="Graphical-lasso penalty.")
@click.option("--gamma", type=float, default=None, help="Shrink ratio (default 2).")
@click.option("--alpha", "alphas", multiple=True, type=float,
              help="Target rate; repeatable. Default grid 2^-1..2^-10.")
@click.option("--k", type=int, default=None, help="Subsample block count.")
@click.option("--d", type=int, default=None, help="Subsample vote threshold.")
@click.option("--seed", type=int, default=None, help="Partition seed (subsampling).")
@click.option("--strict-search", is_flag=True, default=False,
              help="Exhaustive minimality scan in the threshold search.")
@click.option("--center", is_flag=True, default=False,
              help="Center columns in the covariance step.")
@click.option("--glasso-tol", type=float, default=None)
@click.option("--max-sweeps", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--config", type=click.Path(exists=True), default=None)
def recover(in_path, lam, gamma, alphas, k, d, seed, strict_search, center,
            glasso_tol, max_sweeps, out, config):
    """Run the recovery pipeline on a data CSV for one or more target rates."""
    cfg = _load_config(config)
    in_path = _resolve(in_path, cfg, "in")
    lam = _resolve(lam, cfg, "lambda", cast=float)
    gamma = _resolve(gamma, cfg, "gamma", default=2.0, cast=float)
    alphas = _resolve_alphas(alphas, cfg)
    k = _resolve(k, cfg, "k", cast=int)
    d = _resolve(d, cfg, "d", cast=int)
    seed = _resolve(seed, cfg, "seed", default=0, cast=int)
    glasso_tol = _resolve(glasso_tol, cfg, "glasso_tol", default=1e-5, cast=float)
    max_sweeps = _resolve(max_sweeps, cfg, "max_sweeps", default=100, cast=int)
    out = _resolve(out, cfg, "out")
    if in_path is None or lam is None or out is None:
        raise click.ClickException("recover needs --in, --lambda and --out")
    for a in alphas:
        if not 0 < a <= 1:
            raise click.ClickException(f"alpha must be in (0,1], got {a}")
    subsampled = k is not None or d is not None
    if subsampled and (k is None or d is None or not 1 <= d <= k):
        raise click.ClickException("subsampling needs --k and --d with 1 <= d <= k")

    x = read_dense_csv(in_path)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pipeline_kwargs = dict(center=center, glasso_tol=glasso_tol,
                           max_sweeps=max_sweeps, strict=strict_search,
                           keep_step_supports=True)

    try:
        if not subsampled:
            runs = _recover_plain(x, lam, gamma, alphas, out_dir, pipeline_kwargs)
        else:
            runs = _recover_subsampled(x, lam, gamma, alphas, k, d, seed,
                                       out_dir, pipeline_kwargs)
    except ConvergenceError as exc:
        _write_json(out_dir / "error.json", {
            "error": "convergence",
            "message": str(exc),
            "dual_gap": exc.gap,
        })
        raise click.ClickException(f"solver did not converge: {exc}") from exc

    _write_json(out_dir / "manifest.json", {
        "command": "recover",
        "input": str(in_path),
        "lambda": lam,
        "gamma": gamma,
        "strict": strict_search,
        "center": center,
        "n": int(x.shape[0]),
        "p": int(x.shape[1]),
        "subsample": {"k": k, "d": d, "seed": seed} if subsampled else None,
        "runs": runs,
    })
    click.echo(f"wrote {len(runs)} recovery runs to {out_dir}")


def _recover_plain(x, lam, gamma, alphas, out_dir, pipeline_kwargs):
    step_list = [calibrated_steps_for_alpha(a, gamma) for a in alphas]
    trace = recover_support(x, lam, gamma, max(step_list), **pipeline_kwargs)
    runs = []
    for idx, (alpha, steps) in enumerate(zip(alphas, step_list)):
        trace_name = f"trace_{idx:02d}.json"
        support_name = f"support_{idx:02d}.csv"
        _write_json(out_dir / trace_name, _trace_prefix_dict(trace, steps))
        _write_support_csv(out_dir / support_name, trace.step_supports[steps])
        runs.append({"alpha_requested": alpha, "steps": steps,
                     "alpha_steps": gamma ** (-steps),
                     "trace": trace_name, "support": support_name})
    return runs


def _recover_subsampled(x, lam, gamma, alphas, k, d, seed, out_dir, pipeline_kwargs):
    from .subsampling import combine_supports

    alpha_subs = [per_subsample_alpha(a, k, d) for a in alphas]
    step_list = [calibrated_steps_for_alpha(a_sub, gamma) for a_sub in alpha_subs]
    blocks = partition_sample(x, k, seed)
    traces = [recover_support(b, lam, gamma, max(step_list), **pipeline_kwargs)
              for b in blocks]
    runs = []
    for idx, (alpha, alpha_sub, steps) in enumerate(zip(alphas, alpha_subs, step_list)):
        block_names = []
        masks = []
        for b, tr in enumerate(traces):
            name = f"trace_{idx:02d}_b{b}.json"
            _write_json(out_dir / name, _trace_prefix_dict(tr, steps))
            block_names.append(name)
            masks.append(tr.step_supports[steps])
        combined = combine_supports(masks, d)
        combined.per_subsample_alpha = alpha_sub
        support_name = f"support_{idx:02d}.csv"
        votes_name = f"votes_{idx:02d}.csv"
        summary_name = f"summary_{idx:02d}.json"
        _write_support_csv(out_dir / support_name, combined.mask)
        write_votes_csv(out_dir / votes_name, combined)
        _write_json(out_dir / summary_name, {
            "k": k, "d": d, "alpha_sub": alpha_sub, "target_alpha": alpha,
            "bound": binomial_fp_bound(k, d, alpha_sub),
        })
        runs.append({"alpha_requested": alpha, "alpha_sub": alpha_sub,
                     "steps": steps, "alpha_steps": gamma ** (-steps),
                     "support": support_name, "votes": votes_name,
                     "summary": summary_name, "block_traces": block_names})
    return runs


AGGREGATE_HEADER = ["alpha", "fpr", "tpr", "fpr_se", "tpr_se", "replicates"]


@main.command()
@click.option("--truth", type=click.Path(exists=True), required=True,
              help="Ground-truth sparse triplet CSV.")
@click.option("--in", "in_dirs", type=click.Path(exists=True), multiple=True,
              required=True, help="Recover output directory; repeat per replicate.")
@click.option("--out", type=click.Path(), required=True, help="Output CSV path.")
def evaluate(truth, in_dirs, out):
    """Aggregate false/true positive rates over recovery replicates."""
    per_alpha: dict[float, list[tuple[float, float]]] = {}
    dim = None
    for d in in_dirs:
        manifest = json.loads((Path(d) / "manifest.json").read_text())
        if manifest.get("command") != "recover":
            raise click.ClickException(f"{d}: not a recover output directory")
        p = manifest["p"]
        if dim is None:
            dim = p
        elif dim != p:
            raise click.ClickException(f"{d}: dimension {p} disagrees with {dim}")
        truth_mask = None
        for run in manifest["runs"]:
            if truth_mask is None:
                truth_mask = SupportMask(mask=read_triplet_csv(truth, dim) != 0)
            est = SupportMask(mask=read_triplet_csv(Path(d) / run["support"], dim) != 0)
            rates = (fp_rate(est, truth_mask), tp_rate(est, truth_mask))
            per_alpha.setdefault(run["alpha_requested"], []).append(rates)

    rows = []
    for alpha in sorted(per_alpha, reverse=True):
        pairs = np.asarray(per_alpha[alpha])
        reps = pairs.shape[0]
        fpr_mean, tpr_mean = pairs.mean(axis=0)
        if reps > 1:
            fpr_se, tpr_se = pairs.std(axis=0, ddof=1) / math.sqrt(reps)
        else:
            fpr_se = tpr_se = 0.0
        rows.append([alpha, fpr_mean, tpr_mean, fpr_se, tpr_se, reps])

    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_HEADER)
        for alpha, f, t, fse, tse, reps in rows:
            writer.writerow(["%.10g" % alpha, "%.10g" % f, "%.10g" % t,
                             "%.10g" % fse, "%.10g" % tse, reps])
    mirror = [{"alpha": r[0], "fpr": r[1], "tpr": r[2], "fpr_se": r[3],
               "tpr_se": r[4], "replicates": r[5]} for r in rows]
    _write_json(out_path.with_suffix(".json"), {"records": mirror})
    click.echo(f"wrote {out_path} ({len(rows)} alphas, "
               f"{len(in_dirs)} replicates)")


@main.command()
@click.option("--experiment", type=click.Choice(["hoeffding", "hadamard", "shrink"]),
              required=True)
@click.option("--p", "p_values", multiple=True, type=int,
              help="Dimension; repeatable for the hadamard scaling run.")
@click.option("--alpha", type=float, default=None)
@click.option("--m-bound", type=float, default=1.0)
@click.option("--t", type=float, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--gamma", type=float, default=2.0)
@click.option("--s", type=int, default=1)
@click.option("--noise-scale", type=float, default=1.0)
@click.option("--model", type=click.Choice(["tridiag", "tree", "block"]),
              default="tridiag", help="Truth model for the shrink experiment.")
@click.option("--out", type=click.Path(), required=True)
def theory(experiment, p_values, alpha, m_bound, t, trials, seed, gamma, s,
           noise_scale, model, out):
    """Run a Monte Carlo theory check and write its report JSON."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if experiment == "hoeffding":
        if not p_values or alpha is None or t is None:
            raise click.ClickException("hoeffding needs --p, --alpha and --t")
        report = lazy_hoeffding_tail(p_values[0], alpha, m_bound, t,
                                     trials or 10000, seed)
    elif experiment == "hadamard":
        if not p_values or alpha is None:
            raise click.ClickException("hadamard needs --p (repeatable) and --alpha")
        report = sparse_opnorm_scaling(list(p_values), alpha, trials or 50, seed)
    else:
        p = p_values[0] if p_values else 2000
        if model == "tridiag":
            gm = make_tridiagonal(p)
        elif model == "tree":
            depth = int((math.isqrt(8 * p + 1) - 1) // 2)
            gm = make_binary_tree(depth)
        else:
            gm = make_block_diagonal(max(p // 8, 1), 8)
        report = shrink_ratio_experiment(gm, gamma, s, noise_scale,
                                         trials or 50, seed)
    path = out_dir / f"report_{experiment}.json"
    _write_json(path, report.to_json_dict())
    click.echo(f"wrote {path} (pass={report.passed})")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True,
              help="Raw CSV, n rows x p numeric columns, optional header row.")
@click.option("--standardize", is_flag=True, default=False,
              help="Standardize columns to zero mean, unit variance.")
@click.option("--out", type=click.Path(), required=True)
def ingest(in_path, standardize, out):
    """Validate an external CSV and write the canonical data file."""
    rows = []
    header_skipped = False
    with open(in_path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, raw in enumerate(reader, start=1):
            if not raw:
                continue
            if width is None:
                try:
                    rows.append([float(v) for v in raw])
                    width = len(raw)
                    continue
                except ValueError:
                    header_skipped = True
                    width = len(raw)
                    continue
            if len(raw) != width:
                raise click.ClickException(
                    f"{in_path}:{lineno}: ragged row ({len(raw)} fields, expected {width})")
            try:
                rows.append([float(v) for v in raw])
            except ValueError as exc:
                raise click.ClickException(f"{in_path}:{lineno}: non-numeric cell: {exc}")
    if len(rows) < 3:
        raise click.ClickException(f"need at least 3 data rows, got {len(rows)}")
    x = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(x).all():
        raise click.ClickException("input contains non-finite values")
    if standardize:
        std = x.std(axis=0, ddof=0)
        zero = np.flatnonzero(std == 0)
        if zero.size:
            raise click.ClickException(
                f"cannot standardize constant column {int(zero[0]) + 1}")
        x = (x - x.mean(axis=0)) / std
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_dense_csv(out_dir / "data.csv", x)
    _write_json(out_dir / "manifest.json", {
        "command": "ingest",
        "source": str(in_path),
        "n": int(x.shape[0]),
        "p": int(x.shape[1]),
        "standardized": standardize,
        "header_detected": header_skipped,
        "files": {"data": "data.csv"},
    })
    click.echo(f"ingested {x.shape[0]} x {x.shape[1]} matrix to {out_dir}/data.csv")


if __name__ == "__main__":
    main()
