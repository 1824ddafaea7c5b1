#  Copyright 2024 The fockvampire Contributors
#
#  This file is part of fockvampire.
#
#  fockvampire is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  fockvampire is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with fockvampire.  If not, see <https://www.gnu.org/licenses/>.
from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

import click
from click import echo

from fockvampire.config import parse_config
from fockvampire.errors import ConfigError, VampireError
from fockvampire.homodyne import load_dataset
from fockvampire.scenarios import (
    ExperimentConfig,
    ShadowMechanism,
    SubtractionMechanism,
    gaussian_profile,
    heralded_fock_prep,
    shadow_demo,
    vampire_pipeline,
)
from fockvampire.selftest import run_selftest
from fockvampire.tomography import (
    dominant_components,
    maxlik_reconstruct,
    photon_number_distribution,
    result_to_dict,
)

logger = logging.getLogger(__name__)

PROG = "fockvampire"
EXIT_IO_ERROR = 1
EXIT_DOMAIN_ERROR = 2


class Command(Enum):
    VAMPIRE = "vampire"
    SHADOW = "shadow"
    TOMO = "tomo"
    PREP = "prep"
    SELFTEST = "selftest"


@dataclass(frozen=True)
class RunManifest:
    """
    Everything needed to reproduce one run. ``options`` holds the command specific parameters
    (photon number, shadow geometry, dataset path).
    """

    command: Command
    config_path: Path | None = None
    output_dir: Path = Path("fockvampire-out")
    seed_override: int | None = None
    options: dict[str, Any] = field(default_factory=dict)


def _load_config(manifest: RunManifest) -> ExperimentConfig:
    if manifest.config_path is None:
        config = ExperimentConfig()
    else:
        try:
            text = manifest.config_path.read_text()
        except UnicodeDecodeError as err:
            raise ConfigError(f"{manifest.config_path} is not a text file: {err}") from err
        config = parse_config(text)
    if manifest.seed_override is not None:
        config = dataclasses.replace(config, seed=manifest.seed_override)
    return config


def _format_distribution(distribution) -> str:
    return " ".join(f"{p:.3f}" for p in distribution)


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_histogram(path: Path, rows):
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "count", "theory_density"])
        for lo, hi, count, theory in rows:
            writer.writerow([repr(lo), repr(hi), count, repr(theory)])


def _run_vampire(manifest: RunManifest, config: ExperimentConfig) -> dict:
    target = manifest.options.get("n", 1)
    mechanism = SubtractionMechanism(manifest.options.get("mechanism", "physical"))
    report = vampire_pipeline(config, target, mechanism)
    for name, branch in report.branches.items():
        _write_histogram(manifest.output_dir / f"histogram_{name}.csv", branch.histogram_rows())
        echo(f"[{name}] reference |{branch.reference_photons}>")
        echo(f"  true P(n):          {_format_distribution(branch.true_distribution)}")
        echo(f"  reconstructed P(n): {_format_distribution(branch.reconstructed_distribution)}")
        leading = ", ".join(
            f"|{n}>: {p:.3f}" for n, p in dominant_components(branch.reconstructed_distribution)
        )
        echo(f"  leading components: {leading}")
        echo(
            f"  fidelity with |{branch.reference_photons}>: {branch.fidelity_true:.4f} "
            f"(reconstructed {branch.fidelity_reconstructed:.4f})"
        )
        echo(f"  heralding rate: {report.herald_probability * branch.click_probability:.4g}")
    return report.to_dict()


def _run_shadow(manifest: RunManifest, config: ExperimentConfig) -> dict:
    opts = manifest.options
    pixels = opts.get("pixels", 4)
    coefficients = opts.get("coefficients") or gaussian_profile(pixels)
    report = shadow_demo(
        pixels,
        coefficients,
        opts.get("cloud", (0, 1)),
        ShadowMechanism(opts.get("mechanism", "exact")),
        opts.get("photons", 2),
        opts.get("gamma", 0.5),
    )
    report.to_ccd_image().save(manifest.output_dir / "ccd_frame.png")
    echo(f"input  <n_k>: {_format_distribution(report.input_profile)}")
    echo(f"output <n_k>: {_format_distribution(report.output_profile)}")
    echo(f"shadow contrast: {report.contrast:.3e}")
    echo(f"photons: {report.total_input:.4f} -> {report.total_output:.4f}")
    return report.to_dict()


def _run_tomo(manifest: RunManifest, config: ExperimentConfig) -> dict:
    data = load_dataset(manifest.options["dataset"])
    result = maxlik_reconstruct(data, config.tomography_settings())
    echo(f"reconstructed P(n): {_format_distribution(photon_number_distribution(result))}")
    echo(f"iterations: {result.iterations_used} (converged: {result.converged})")
    return result_to_dict(result)


def _run_prep(manifest: RunManifest, config: ExperimentConfig) -> dict:
    target = manifest.options.get("n", 1)
    signal, probability = heralded_fock_prep(config, target)
    distribution = photon_number_distribution(signal)
    echo(f"heralded P(n): {_format_distribution(distribution)}")
    echo(f"herald probability: {probability:.4g}")
    return {
        "target_N": target,
        "herald_probability": probability,
        "photon_numbers": distribution.tolist(),
    }


_RUNNERS = {
    Command.VAMPIRE: _run_vampire,
    Command.SHADOW: _run_shadow,
    Command.TOMO: _run_tomo,
    Command.PREP: _run_prep,
}


def _run_selftest() -> int:
    results = run_selftest()
    for result in results:
        echo(f"{'ok  ' if result.passed else 'FAIL'} {result.name}: {result.detail}")
    failed = sum(not r.passed for r in results)
    echo(f"{len(results) - failed}/{len(results)} checks passed.")
    return 0 if failed == 0 else EXIT_DOMAIN_ERROR


def _fail(err: Exception, code: int) -> int:
    click.echo(f"{PROG}: error: {type(err).__name__}: {err}", err=True)
    return code


def run(manifest: RunManifest) -> int:
    """
    Execute one command. Reports go to ``report.json`` in the output directory; the timestamp
    lives in ``metadata.json`` so that reports are byte-identical across identical runs.

    :return: The process exit status.
    """
    try:
        if manifest.command is Command.SELFTEST:
            return _run_selftest()
        config = _load_config(manifest)
        manifest.output_dir.mkdir(parents=True, exist_ok=True)
        payload = _RUNNERS[manifest.command](manifest, config)
        _write_json(manifest.output_dir / "report.json", payload)
        _write_json(
            manifest.output_dir / "metadata.json",
            {
                "command": manifest.command.value,
                "created": datetime.now(timezone.utc).isoformat(),
                "seed": config.seed,
            },
        )
    except VampireError as err:
        return _fail(err, EXIT_DOMAIN_ERROR)
    except OSError as err:
        return _fail(err, EXIT_IO_ERROR)
    echo(f"Reports written to {manifest.output_dir}.")
    return 0


def _complex_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [complex(part.strip()) for part in value.split(",")]
    except ValueError:
        raise click.BadParameter("expected a comma separated list of complex numbers")


def _int_list(ctx, param, value):
    try:
        return [int(part) for part in value.split(",")]
    except ValueError:
        raise click.BadParameter("expected a comma separated list of pixel indices")


config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    required=False,
    help="Experiment configuration file (key = value lines). Defaults are used for absent keys.",
)
out_option = click.option(
    "--out",
    "output_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("fockvampire-out"),
    help="[Default: fockvampire-out] Directory the reports are written to.",
)
seed_option = click.option(
    "--seed", type=int, required=False, help="Overrides the seed of the configuration."
)
n_option = click.option(
    "--n",
    "n",
    type=click.Choice(["1", "2"]),
    default="1",
    help="[Default: 1] Number of photons in the heralded Fock state.",
)


def _finish(manifest: RunManifest):
    click.get_current_context().exit(run(manifest))


@click.group()
@click.option(
    "-v",
    "--loglevel",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "FATAL", "CRITICAL"]),
    default="INFO",
    help="[Default: INFO] Log level.",
)
def main(loglevel):
    """
    Simulates local photon subtraction from a beamsplitter-distributed Fock state and its
    homodyne tomography, and compares photon annihilation with absorption on a multi-pixel beam.
    """
    logging.basicConfig(level=getattr(logging, loglevel), format="%(levelname)s %(name)s: %(message)s")


@main.command()
@config_option
@out_option
@seed_option
@n_option
@click.option(
    "--mechanism",
    type=click.Choice([m.value for m in SubtractionMechanism]),
    default=SubtractionMechanism.PHYSICAL.value,
    help="[Default: physical] How the photon is subtracted: tap and click detector, exact "
    "annihilation, or not at all.",
)
def vampire(config_path, output_dir, seed, n, mechanism):
    """
    Heralds |N>, splits it, subtracts a photon from one arm, recombines and reconstructs the
    result by homodyne tomography, with and without the subtraction click.
    """
    _finish(
        RunManifest(
            Command.VAMPIRE, config_path, output_dir, seed, {"n": int(n), "mechanism": mechanism}
        )
    )


@main.command()
@config_option
@out_option
@seed_option
@click.option("--pixels", type=int, default=4, help="[Default: 4] Number of pixel modes.")
@click.option(
    "--cloud",
    callback=_int_list,
    default="0,1",
    help="[Default: 0,1] Pixels covered by the cloud, comma separated.",
)
@click.option(
    "--mechanism",
    type=click.Choice([m.value for m in ShadowMechanism]),
    default=ShadowMechanism.EXACT_ANNIHILATION.value,
    help="[Default: exact] Photon annihilation or absorption on the cloud mode.",
)
@click.option(
    "--gamma", type=float, default=0.5, help="[Default: 0.5] Loss fraction of the cloud."
)
@click.option(
    "--coefficients",
    callback=_complex_list,
    required=False,
    help="Beam profile amplitudes per pixel, comma separated. Defaults to a Gaussian.",
)
@click.option(
    "--photons", type=int, default=2, help="[Default: 2] Photon number of the input Fock state."
)
def shadow(config_path, output_dir, seed, pixels, cloud, mechanism, gamma, coefficients, photons):
    """
    Spreads a Fock state over several pixels and acts on the mode of a cloud covering some of
    them. Writes the per-pixel intensities and a CCD frame.
    """
    options = {
        "pixels": pixels,
        "cloud": cloud,
        "mechanism": mechanism,
        "gamma": gamma,
        "coefficients": coefficients,
        "photons": photons,
    }
    _finish(RunManifest(Command.SHADOW, config_path, output_dir, seed, options))


@main.command()
@click.argument("dataset", type=click.Path(dir_okay=False, path_type=Path))
@config_option
@out_option
@seed_option
def tomo(dataset, config_path, output_dir, seed):
    """
    Reconstructs the density matrix behind a quadrature DATASET (phase,value lines). The cutoff
    and the detection efficiency compensated for are taken from the configuration.
    """
    _finish(RunManifest(Command.TOMO, config_path, output_dir, seed, {"dataset": dataset}))


@main.command()
@config_option
@out_option
@seed_option
@n_option
def prep(config_path, output_dir, seed, n):
    """Heralds a one- or two-photon Fock state and reports its photon-number distribution."""
    _finish(RunManifest(Command.PREP, config_path, output_dir, seed, {"n": int(n)}))


@main.command()
def selftest():
    """Runs a quick suite of invariant checks."""
    _finish(RunManifest(Command.SELFTEST))


if __name__ == "__main__":
    main()
