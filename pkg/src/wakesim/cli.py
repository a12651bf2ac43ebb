"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
failure. Errors print one machine-parsable line on stderr:
``wakesim: error: <kind>: <message>``.
"""

from __future__ import annotations

import functools
import os
import sys

import click
import numpy as np

from . import bayesfront, config as cfg, energymodel, memsim, mlpback, report as reportmod
from .data import default_rates_fixture
from .datapipe import beats as beatsmod
from .datapipe import features as featmod
from .datapipe.synthetic import synth_dataset
from .errors import ConfigError, DataError, WakesimError
from .wakectl import WakePolicy, run_stream, wake_stats


def _fail(kind: str, message: str, code: int):
    click.echo(f"wakesim: error: {kind}: {message}", err=True)
    sys.exit(code)


def cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail("config", str(exc), 2)
        except DataError as exc:
            _fail("data", str(exc), 3)
        except (WakesimError, OSError, ValueError) as exc:
            _fail("runtime", str(exc), 4)
    return wrapper


@click.group()
def main():
    """Simulator and benchmark harness for the wake-up inference system."""


# ---------------------------------------------------------------------------
# prepare-data
# ---------------------------------------------------------------------------

@main.command("prepare-data")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--source", type=click.Choice(["synthetic", "wfdb", "csv"]), default=None)
@click.option("--seed", type=int, default=None, help="Dataset seed (synthetic generation or split).")
@click.option("--beats-per-class", type=int, default=None)
@click.option("--test-per-class", type=int, default=None)
@click.option("--noise-sigma", type=float, default=None)
@click.option("--wfdb-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--train-csv", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--test-csv", type=click.Path(exists=True, dir_okay=False), default=None)
@cli_errors
def prepare_data(out_dir, config_path, source, seed, beats_per_class, test_per_class,
                 noise_sigma, wfdb_dir, train_csv, test_csv):
    """Build a dataset split and its feature cache."""
    parser = cfg.load_config(config_path)
    source = source or parser.get("dataset", "source")
    seed = seed if seed is not None else cfg.get_int(parser, "dataset", "seed")
    beats_per_class = beats_per_class if beats_per_class is not None else cfg.get_int(parser, "dataset", "beats_per_class")
    test_per_class = test_per_class if test_per_class is not None else cfg.get_int(parser, "dataset", "test_per_class")
    noise_sigma = noise_sigma if noise_sigma is not None else cfg.get_float(parser, "dataset", "noise_sigma")

    if source == "synthetic":
        if noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        ds = synth_dataset(seed, beats_per_class, noise_sigma, test_per_class)
    elif source == "wfdb":
        if wfdb_dir is None:
            raise ConfigError("--wfdb-dir is required with source=wfdb")
        all_beats, skipped = beatsmod.ingest_wfdb_dir(wfdb_dir)
        click.echo(f"ingested {len(all_beats)} beats ({skipped} skipped at record edges)")
        ds = beatsmod.balanced_split(all_beats, beats_per_class, test_per_class, seed)
    else:
        if train_csv is None or test_csv is None:
            raise ConfigError("--train-csv and --test-csv are required with source=csv")
        ds = beatsmod.Dataset(
            train=beatsmod.read_beats_csv(train_csv),
            test=beatsmod.read_beats_csv(test_csv),
            seed=seed,
        )

    os.makedirs(out_dir, exist_ok=True)
    beatsmod.write_beats_csv(os.path.join(out_dir, "train.csv"), ds.train)
    beatsmod.write_beats_csv(os.path.join(out_dir, "test.csv"), ds.test)
    beatsmod.write_manifest(os.path.join(out_dir, "manifest.json"), ds)
    train_mags, train_labels = featmod.feature_matrix(ds.train)
    test_mags, test_labels = featmod.feature_matrix(ds.test)
    np.savez(
        os.path.join(out_dir, "features.npz"),
        train_mags=train_mags, train_labels=train_labels,
        test_mags=test_mags, test_labels=test_labels,
    )
    click.echo(f"train {ds.class_counts('train')} test {ds.class_counts('test')} -> {out_dir}")


def _load_features(data_dir: str):
    path = os.path.join(data_dir, "features.npz")
    if not os.path.exists(path):
        raise DataError(f"{path} not found; run prepare-data first")
    with np.load(path) as npz:
        return (npz["train_mags"], npz["train_labels"], npz["test_mags"], npz["test_labels"])


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None, help="Training seed (init and batch order).")
@click.option("--epochs", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@cli_errors
def train(data_dir, out_dir, config_path, seed, epochs, lr, batch_size):
    """Fit the front-end code table and the int8 back end."""
    parser = cfg.load_config(config_path)
    codec = bayesfront.LogCodec(
        base=cfg.get_float(parser, "codec", "base"),
        scale=cfg.get_int(parser, "codec", "scale"),
        width=cfg.get_int(parser, "codec", "width"),
    )
    train_config = mlpback.TrainConfig(
        lr=lr if lr is not None else cfg.get_float(parser, "train", "lr"),
        epochs=epochs if epochs is not None else cfg.get_int(parser, "train", "epochs"),
        batch_size=batch_size if batch_size is not None else cfg.get_int(parser, "train", "batch_size"),
        seed=seed if seed is not None else cfg.get_int(parser, "train", "seed"),
    )
    train_mags, train_labels, test_mags, test_labels = _load_features(data_dir)
    ranked = featmod.chi2_rank(train_mags, train_labels)

    model = bayesfront.fit_bayes_model(train_mags, train_labels, ranked, codec)
    clf = mlpback.fit_backend(train_mags, train_labels, ranked, train_config)

    os.makedirs(out_dir, exist_ok=True)
    bayesfront.save_bayes_model(os.path.join(out_dir, "bayes_model.json"), model)
    mlpback.save_classifier(os.path.join(out_dir, "mlp_model.json"), clf)

    mlp_acc = float(np.mean(clf.predict_features(test_mags) == test_labels))
    click.echo(f"front-end bins {list(model.feature_bins)}")
    click.echo(f"back-end int8 test accuracy {mlp_acc:.4f}")
    click.echo(f"models -> {out_dir}")


# ---------------------------------------------------------------------------
# program
# ---------------------------------------------------------------------------

@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--preset", type=str, default=None, help="Operating regime preset (A, B, or C).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None, help="Programming seed (device draws).")
@cli_errors
def program(model_path, out_path, preset, config_path, seed):
    """Program the code table into a simulated resistive array."""
    parser = cfg.load_config(config_path)
    if preset is not None:
        parser.set("operating_point", "preset", preset)
    op, dists, noise = cfg.build_operating_setup(parser)
    seed = seed if seed is not None else cfg.get_int(parser, "seeds", "program")
    model = bayesfront.load_bayes_model(model_path)
    state = memsim.program_arrays(model, dists, op.vddr, seed)
    memsim.save_array_state(out_path, state, op, noise)
    eps = noise.flip_probability(memsim.margins(state), op.vdd)
    click.echo(
        f"programmed {state.codes.size} words at vddr={op.vddr} "
        f"(vdd={op.vdd}, mean bit error {float(eps.mean()):.3e}) -> {out_path}"
    )


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--bayes", "bayes_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mlp", "mlp_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--array-state", "state_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--ideal", is_flag=True, help="Use the fault-free word reader.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None, help="Read-noise seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@cli_errors
def run(data_dir, bayes_path, mlp_path, state_path, ideal, config_path, seed, out_dir):
    """Stream the test split through the wake-up system."""
    if (state_path is None) == (not ideal):
        raise ConfigError("choose exactly one of --array-state or --ideal")
    parser = cfg.load_config(config_path)
    seed = seed if seed is not None else cfg.get_int(parser, "seeds", "read")
    policy = WakePolicy(
        wake_on_abnormal=cfg.get_bool(parser, "policy", "wake_on_abnormal"),
        wake_on_ambiguous=cfg.get_bool(parser, "policy", "wake_on_ambiguous"),
        wake_on_invalid=cfg.get_bool(parser, "policy", "wake_on_invalid"),
    )
    test_csv = os.path.join(data_dir, "test.csv")
    if not os.path.exists(test_csv):
        raise DataError(f"{test_csv} not found; run prepare-data first")
    test_beats = beatsmod.read_beats_csv(test_csv)
    model = bayesfront.load_bayes_model(bayes_path)
    clf = mlpback.load_classifier(mlp_path)
    if ideal:
        reader = bayesfront.IdealReader(model)
        regime = "ideal"
    else:
        state, op, noise = memsim.load_array_state(state_path)
        if not np.array_equal(state.codes, model.codes):
            raise DataError("array state was programmed from a different code table")
        reader = memsim.MemristorReader(state, op, noise, seed)
        regime = op.label or f"vdd={op.vdd},vddr={op.vddr}"

    result = run_stream(test_beats, model, reader, clf, policy)
    stats = wake_stats(result)

    # Energy at the run's operating supply from the measured wake rates.
    params = cfg.build_energy_params(parser)
    vdd_run = params.vdd_nominal if ideal else op.vdd
    energy_rows = None
    if stats.p_wake_abnormal is not None and stats.p_wake_normal is not None:
        rates = energymodel.WakeRates(stats.p_wake_abnormal, stats.p_wake_normal)
        breakdown = energymodel.e_avg(params, vdd_run, rates)
        energy_rows = [{
            "vdd": vdd_run,
            "t_s": params.t_s,
            "p_wake": energymodel.p_wake(rates, params.pi),
            "e_fe": breakdown.front_end,
            "e_mon": breakdown.monitoring,
            "e_service_term": breakdown.service,
            "e_avg": breakdown.total,
            "e_baseline": energymodel.e_baseline(params, vdd_run),
        }]

    os.makedirs(out_dir, exist_ok=True)
    result.write_trace(os.path.join(out_dir, "trace.csv"))
    doc = reportmod.build_report(
        stream=result,
        energy_rows=energy_rows,
        config={"regime": regime, **cfg.config_as_dict(parser)},
        seeds={"read": seed},
    )
    reportmod.save_report(os.path.join(out_dir, "report.json"), doc)
    with open(os.path.join(out_dir, "report.txt"), "w") as fh:
        fh.write(reportmod.render_report(doc))

    front = doc["front_end"]["macro_f1_abnormal"]
    system = doc["system"]["macro_f1_abnormal"]
    click.echo(f"regime {regime}: front macro-F1 {front:.4f}, system macro-F1 {system:.4f}")
    click.echo(
        f"p(wake|abnormal)={stats.p_wake_abnormal} p(wake|normal)={stats.p_wake_normal} "
        f"backend_errors={result.backend_errors}"
    )
    click.echo(f"trace + report -> {out_dir}")


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@main.command()
@click.option("--rates", "rates_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Wake-rate CSV (vdd,vddr,p_wake_abn,p_wake_n); bundled table by default.")
@click.option("--vdd", "vdd_list", type=str, default=None, help="Comma-separated vdd grid.")
@click.option("--ts", "ts_list", type=str, default="2.0e-3,1.0", help="Comma-separated t_s grid.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@cli_errors
def sweep(rates_path, vdd_list, ts_list, config_path, out_path):
    """Evaluate the energy model over a vdd x t_s grid."""
    parser = cfg.load_config(config_path)
    params = cfg.build_energy_params(parser)
    rates = energymodel.RatesTable.from_csv(rates_path or default_rates_fixture())
    if vdd_list:
        try:
            vdd_grid = [float(v) for v in vdd_list.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--vdd: non-numeric entry in {vdd_list!r}")
    else:
        vdd_grid = rates.vdds
    try:
        ts_grid = [float(v) for v in ts_list.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--ts: non-numeric entry in {ts_list!r}")
    result = energymodel.sweep(params, vdd_grid, ts_grid, rates)
    energymodel.write_sweep_csv(out_path, result)
    for t_s in ts_grid:
        best = result.argmin(t_s)
        ratio = best.e_baseline / best.e_avg
        click.echo(
            f"t_s={t_s:g}: argmin vdd={best.vdd:g} e_avg={best.e_avg:.4e} J "
            f"baseline={best.e_baseline:.4e} J ratio={ratio:.2f}"
        )
    click.echo(f"sweep -> {out_path}")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@main.command("report")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@cli_errors
def report_cmd(path):
    """Render a stored report.json for reading."""
    doc = reportmod.load_report(path)
    click.echo(reportmod.render_report(doc), nl=False)


if __name__ == "__main__":
    main()
