"""Command-line front end.

Subcommands: spectrum, device-sweep, neuron-trace, train, convert,
infer.  Every run writes its fully resolved configuration next to its
outputs; re-running from that file reproduces the metrics bitwise.
Wall-clock timings go to a separate timing.json so metrics.json stays
deterministic.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
error.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import ann as ann_mod
from . import dataio, neuron as neuron_mod, phase_change, snn as snn_mod
from .config import ConfigError, RunConfig
from .dataio import IdxFormatError
from .materials import GstState

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def build_parser():
    # SUPPRESS keeps the subcommand parser from clobbering flags that were
    # given before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="INI configuration file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override [run] seed")
    common.add_argument("--out-dir", default=argparse.SUPPRESS,
                        help="override [run] out_dir")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="override [run] jobs")

    parser = argparse.ArgumentParser(
        prog="ringsnn",
        description="GST microring spiking-neuron simulator and MNIST pipeline",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    command("spectrum", "emit THROUGH/DROP spectra per crystallization level")
    command("device-sweep", "emit the write-pulse amorphization surface")

    trace = command("neuron-trace", "step a neuron along a drive file")
    trace.add_argument("drive", help="CSV of t,weighted_sum rows")

    command("train", "train the reference ANN on MNIST")

    conv = command("convert", "convert a trained ANN to spiking networks")
    conv.add_argument("model", help="model.json from a train run")

    infer = command("infer", "evaluate ANN, ideal SNN and device SNN")
    infer.add_argument("model", help="model.json from a train run")
    infer.add_argument("--ideal-net", help="ideal network file (default: convert in place)")
    infer.add_argument("--device-net", help="device network file")
    return parser


def _load_config(args) -> RunConfig:
    config_path = getattr(args, "config", None)
    config = RunConfig.load(config_path) if config_path else RunConfig()
    for key in ("seed", "out_dir", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            config.override("run", key, value)
    return config


def cmd_spectrum(config: RunConfig, args, run_dir: Path) -> int:
    from .photonics import extinction_contrast_db, resonance_shift

    device = config.ring_device()
    scfg = config.sections["spectrum"]
    band = (scfg["band_nm_low"] * 1e-9, scfg["band_nm_high"] * 1e-9)
    try:
        p_values = [float(tok) for tok in scfg["p_values"].split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"[spectrum] p_values: {exc}") from None
    out = run_dir / "spectrum.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["wavelength_nm", "T_through", "T_drop", "p"])
        for p in p_values:
            points = device.spectrum(GstState(p), band, scfg["points"])
            for pt in points:
                writer.writerow(
                    [repr(pt.wavelength * 1e9), repr(pt.t_through), repr(pt.t_drop), repr(p)]
                )
    # state-to-state resonance displacement, fractional and absolute
    delta_n = device.indices.n_eff_gst(1.0) - device.indices.n_eff_gst(0.0)
    shift_m = resonance_shift(device.indices, device.geometry, delta_n, device.lambda_read)
    through_db, drop_db = extinction_contrast_db(device)
    dataio.write_json(
        run_dir / "spectrum_summary.json",
        {
            "resonance_shift_fractional": shift_m / device.lambda_read,
            "resonance_shift_nm": shift_m * 1e9,
            "extinction_contrast_through_db": through_db,
            "extinction_contrast_drop_db": drop_db,
        },
    )
    print(f"wrote {out} ({len(p_values)} crystallization levels)")
    print(
        f"resonance shift between states: fractional {shift_m / device.lambda_read:.3e}, "
        f"absolute {shift_m * 1e9:.4f} nm"
    )
    return EXIT_OK


def cmd_device_sweep(config: RunConfig, args, run_dir: Path) -> int:
    thermal = config.thermal_model()
    sweep = config.sections["sweep"]
    table = phase_change.tabulate_map(
        thermal,
        a_points=sweep["a_points"],
        power_points=sweep["power_points"],
        power_max=sweep["power_max_w"],
    )
    out = run_dir / "amorphization_map.csv"
    table.to_csv(out)
    print(f"wrote {out} ({sweep['a_points']}x{sweep['power_points']} surface)")
    return EXIT_OK


def _read_drive_file(path):
    drives = []
    with open(path, newline="") as fh:
        for row_number, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if row_number == 1 and not _is_number(row[-1]):
                continue  # header row
            try:
                drives.append(float(row[-1]))
            except ValueError:
                raise IdxFormatError(
                    f"{path}: malformed drive value {row[-1]!r} at row {row_number}"
                ) from None
    return drives


def _is_number(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def cmd_neuron_trace(config: RunConfig, args, run_dir: Path) -> int:
    ncfg = config.sections["neuron"]
    cell = neuron_mod.PhotonicNeuron.fresh(
        device=config.ring_device(),
        thermal=config.thermal_model(),
        threshold_fraction=ncfg["threshold_fraction"],
        power_window=(ncfg["power_min_w"], ncfg["power_max_w"]),
        routing=ncfg["routing"],
    )
    drives = _read_drive_file(args.drive)
    ledger = neuron_mod.EnergyLedger()
    traces_dir = run_dir / "traces"
    traces_dir.mkdir(exist_ok=True)
    out = traces_dir / "neuron_trace.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "drive", "membrane_potential", "spiked", "p_pos", "p_neg"])
        for t, drive in enumerate(drives):
            result = neuron_mod.step(cell, drive, ledger)
            writer.writerow(
                [
                    t,
                    repr(drive),
                    repr(result.membrane_potential),
                    int(result.spiked),
                    repr(result.neuron.pos_p),
                    repr(result.neuron.neg_p),
                ]
            )
            cell = result.neuron
    report = neuron_mod.energy_report(ledger, 1, len(drives))
    dataio.write_json(run_dir / "trace_energy.json", report)
    print(f"wrote {out} ({len(drives)} steps, {report['total_pj']} pJ)")
    return EXIT_OK


def _load_dataset(config, split):
    return dataio.load_mnist(config.get("data", "dir"), split)


def cmd_train(config: RunConfig, args, run_dir: Path) -> int:
    tcfg = config.sections["training"]
    train = _load_dataset(config, "train")
    test = _load_dataset(config, "test")
    subset = tcfg["train_subset"]
    if subset:
        train = train.take(dataio.DatasetSlice(count=subset).indices(len(train)))
    model = ann_mod.MlpClassifier(
        hidden=(tcfg["hidden"],),
        epochs=tcfg["epochs"],
        batch_size=tcfg["batch_size"],
        learning_rate=tcfg["learning_rate"],
        lr_decay=tcfg["lr_decay"],
        seed=config.get("run", "seed"),
        bias_mode=tcfg["bias_mode"],
    )
    X = dataio.normalize(train.flat_images)
    X_test = dataio.normalize(test.flat_images)
    model.fit(X, train.labels, eval_set=(X_test, test.labels))
    model.save(run_dir / "model.json")
    with open(run_dir / "trainlog.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "train_accuracy", "eval_accuracy"])
        for rec in model.history_:
            writer.writerow(
                [
                    rec["epoch"],
                    repr(rec["loss"]),
                    repr(rec["train_accuracy"]),
                    repr(rec.get("eval_accuracy", "")),
                ]
            )
    final = model.history_[-1] if model.history_ else {}
    print(
        f"wrote {run_dir / 'model.json'} "
        f"(train acc {final.get('train_accuracy')}, test acc {final.get('eval_accuracy')})"
    )
    return EXIT_OK


def _convert(config, model):
    ccfg = config.sections["conversion"]
    ncfg = config.sections["neuron"]
    train = _load_dataset(config, "train")
    cal_count = min(ccfg["calibration_size"], len(train))
    calibration = dataio.normalize(train.flat_images[:cal_count])
    return ann_mod.convert(
        model,
        calibration,
        percentile=ccfg["percentile"],
        time_steps=config.get("snn", "time_steps"),
        threshold_fraction=ncfg["threshold_fraction"],
        routing=ncfg["routing"],
        drive_percentile=ccfg["drive_percentile"],
    )


def cmd_convert(config: RunConfig, args, run_dir: Path) -> int:
    model = ann_mod.MlpClassifier.load(args.model)
    result = _convert(config, model)
    result.ideal.save(run_dir / "ideal_snn.json")
    result.device.save(run_dir / "device_snn.json")
    dataio.write_json(run_dir / "conversion.json", result.report.to_dict())
    print(f"wrote {run_dir / 'ideal_snn.json'} and {run_dir / 'device_snn.json'}")
    return EXIT_OK


def cmd_infer(config: RunConfig, args, run_dir: Path) -> int:
    started = time.time()
    model = ann_mod.MlpClassifier.load(args.model)
    if args.ideal_net and args.device_net:
        ideal = snn_mod.SnnNetwork.load(args.ideal_net)
        device_net = snn_mod.SnnNetwork.load(args.device_net)
        conversion_info = {"source": "precomputed"}
    else:
        result = _convert(config, model)
        ideal, device_net = result.ideal, result.device
        conversion_info = result.report.to_dict()
    device_net.device = config.ring_device()
    device_net.thermal = config.thermal_model()

    test = _load_dataset(config, "test")
    subset = config.get("data", "eval_subset")
    if subset:
        test = test.take(dataio.DatasetSlice(count=subset).indices(len(test)))
    X_test = dataio.normalize(test.flat_images)
    labels = test.labels

    seed = config.get("run", "seed")
    jobs = config.get("run", "jobs")
    snn_cfg = config.sections["snn"]
    time_steps = snn_cfg["time_steps"]

    ann_accuracy = float(np.mean(model.predict(X_test) == labels))
    eval_kwargs = dict(
        time_steps=time_steps,
        seed=seed,
        encoder=snn_cfg["encoder"],
        chunk=snn_cfg["chunk"],
        jobs=jobs,
    )
    ideal_eval = snn_mod.evaluate(ideal, test.images, labels, **eval_kwargs)
    device_eval = snn_mod.evaluate(device_net, test.images, labels, **eval_kwargs)

    metrics = {
        "images": int(len(labels)),
        "time_steps": time_steps,
        "seed": seed,
        "ann_accuracy": ann_accuracy,
        "ideal_snn_accuracy": ideal_eval.accuracy,
        "device_snn_accuracy": device_eval.accuracy,
        "ann_to_ideal_gap": ann_accuracy - ideal_eval.accuracy,
        "ideal_to_device_gap": ideal_eval.accuracy - device_eval.accuracy,
        "ideal_confusion": ideal_eval.confusion.tolist(),
        "device_confusion": device_eval.confusion.tolist(),
        "ideal_per_class_spikes": ideal_eval.spike_counts.sum(axis=0).tolist(),
        "device_per_class_spikes": device_eval.spike_counts.sum(axis=0).tolist(),
        "device_clip_rate": device_eval.clip_rate,
        "energy": device_eval.energy,
        "conversion": conversion_info,
    }
    dataio.write_json(run_dir / "metrics.json", metrics)
    dataio.write_json(
        run_dir / "timing.json", {"wall_clock_s": time.time() - started}
    )
    print(
        f"ANN {ann_accuracy:.4f} | ideal SNN {ideal_eval.accuracy:.4f} | "
        f"device SNN {device_eval.accuracy:.4f} | wrote {run_dir / 'metrics.json'}"
    )
    return EXIT_OK


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "device-sweep": cmd_device_sweep,
    "neuron-trace": cmd_neuron_trace,
    "train": cmd_train,
    "convert": cmd_convert,
    "infer": cmd_infer,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        run_dir = dataio.new_run_dir(config.get("run", "out_dir"), args.command)
        config.save(run_dir / "config.ini")
        return _COMMANDS[args.command](config, args, run_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, IdxFormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
