"""Command-line interface.

Subcommands: run-sender / run-receiver (one party each, over TCP),
local (both parties in-process), plan (closed-form privacy/utility report),
bench (scaling sweep on synthetic inputs).  The DPPSI_LOG_LEVEL environment
variable controls logging; there is no flag for it.
"""

from __future__ import annotations

import json
import logging
import os

import click

from .accountant import format_report, plan_report
from .bench import bench_sweep, to_csv
from .errors import DpPsiError
from .inputs import load_items
from .transport import RunConfig, run_local, run_networked


def _configure_logging() -> None:
    level_name = os.environ.get("DPPSI_LOG_LEVEL", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _privacy_options(f):
    f = click.option("--eps-a", type=float, default=3.0, show_default=True,
                     help="Sender-side privacy budget.")(f)
    f = click.option("--delta-b", type=float, default=1e-10, show_default=True,
                     help="Receiver-side failure probability.")(f)
    f = click.option("--p-b", type=float, default=0.9, show_default=True,
                     help="Receiver subsampling rate, in [0.5, 1].")(f)
    return f


@click.group()
def main() -> None:
    _configure_logging()


def _echo_record(record) -> None:
    click.echo(
        f"runtime {record.runtime_seconds:.3f} s, "
        f"transcript {record.comm_megabytes:.4f} MB"
    )


def _emit_result(result, out: str | None) -> None:
    lines = [e.decode("utf-8", errors="backslashreplace") for e in result.elements]
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        click.echo(f"{len(lines)} intersection element(s) written to {out}")
    else:
        for line in lines:
            click.echo(line)
    if result.payload_sum is not None:
        click.echo(f"payload_sum {result.payload_sum:.6g}")
    click.echo(
        f"|Y_sub| {result.stats.y_sub_size}, |I_dp| {result.stats.dp_size}"
    )


@main.command("run-sender")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="This party's item file, one per line.")
@_privacy_options
@click.option("--seed", type=int, default=None, help="Deterministic run seed.")
@click.option("--listen", default=None, help="host:port to accept the peer on.")
@click.option("--connect", default=None, help="host:port of the listening peer.")
def run_sender(input_path, eps_a, delta_b, p_b, seed, listen, connect) -> None:
    """Run the sender over TCP; learns nothing beyond subsample statistics."""
    cfg = RunConfig(input_path=input_path, eps_a=eps_a, delta_b=delta_b, p_b=p_b,
                    seed=seed, listen=listen, connect=connect)
    _, record = run_networked(cfg, "sender")
    click.echo("sender finished; no intersection output by design")
    _echo_record(record)


@main.command("run-receiver")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="This party's item file, one per line.")
@click.option("--payloads", "payload_path", type=click.Path(exists=True), default=None,
              help="Numeric payload per item, aligned with --input.")
@_privacy_options
@click.option("--seed", type=int, default=None, help="Deterministic run seed.")
@click.option("--listen", default=None, help="host:port to accept the peer on.")
@click.option("--connect", default=None, help="host:port of the listening peer.")
@click.option("--out", default=None, type=click.Path(),
              help="Write the noised intersection here instead of stdout.")
def run_receiver(input_path, payload_path, eps_a, delta_b, p_b, seed, listen,
                 connect, out) -> None:
    """Run the receiver over TCP; prints the noised intersection."""
    cfg = RunConfig(input_path=input_path, payload_path=payload_path, eps_a=eps_a,
                    delta_b=delta_b, p_b=p_b, seed=seed, listen=listen,
                    connect=connect)
    result, record = run_networked(cfg, "receiver")
    _emit_result(result, out)
    _echo_record(record)


@main.command("local")
@click.option("--input", "inputs", multiple=True, type=click.Path(exists=True),
              help="Item files: give twice (sender, then receiver) or not at all "
                   "for synthetic sets.")
@click.option("--payloads", "payload_path", type=click.Path(exists=True), default=None,
              help="Receiver payload file.")
@_privacy_options
@click.option("--seed", type=int, default=None, help="Deterministic run seed.")
@click.option("--out", default=None, type=click.Path(),
              help="Write the noised intersection here instead of stdout.")
def local(inputs, payload_path, eps_a, delta_b, p_b, seed, out) -> None:
    """Run both parties in-process over a duplex channel."""
    if len(inputs) not in (0, 2):
        raise click.UsageError("--input must be given exactly twice, or omitted")
    sender_path, receiver_path = (inputs if inputs else (None, None))
    cfg = RunConfig(input_path=sender_path, receiver_input_path=receiver_path,
                    payload_path=payload_path, eps_a=eps_a, delta_b=delta_b,
                    p_b=p_b, seed=seed)
    result, record = run_local(cfg)
    _emit_result(result, out)
    _echo_record(record)
    click.echo(
        f"observed recall {record.recall_observed:.4f}, "
        f"precision {record.precision_observed:.4f}"
    )


@main.command("plan")
@click.option("--input", "input_path", type=click.Path(exists=True), default=None,
              help="Optional item file; its item count is used as the "
                   "hypothesized intersection size.")
@_privacy_options
@click.option("--out", default=None, type=click.Path(),
              help="Write the report here (.json for JSON, else text).")
def plan(input_path, eps_a, delta_b, p_b, out) -> None:
    """Print closed-form privacy and utility numbers without running."""
    size = len(load_items(input_path)) if input_path else None
    report = plan_report(eps_a=eps_a, delta_b=delta_b, p_b=p_b,
                         intersection_size=size)
    if out and out.endswith(".json"):
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        click.echo(f"report written to {out}")
    elif out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(format_report(report) + "\n")
        click.echo(f"report written to {out}")
    else:
        click.echo(format_report(report))


@main.command("bench")
@click.option("--bench-kmin", type=int, default=10, show_default=True,
              help="Smallest log2 input size.")
@click.option("--bench-kmax", type=int, default=17, show_default=True,
              help="Largest log2 input size.")
@_privacy_options
@click.option("--seed", type=int, default=None, help="Deterministic run seed.")
@click.option("--out", default=None, type=click.Path(),
              help="CSV output path (default: stdout).")
def bench(bench_kmin, bench_kmax, eps_a, delta_b, p_b, seed, out) -> None:
    """Sweep synthetic input sizes 2^kmin..2^kmax and report scaling."""
    cfg = RunConfig(eps_a=eps_a, delta_b=delta_b, p_b=p_b, seed=seed)
    records = bench_sweep(bench_kmin, bench_kmax, cfg, out_path=out)
    if out:
        click.echo(f"{len(records)} records written to {out}")
    else:
        import io

        buf = io.StringIO()
        to_csv(records, buf)
        click.echo(buf.getvalue().rstrip("\n"))


def run() -> None:
    try:
        main(standalone_mode=True)
    except DpPsiError as exc:
        raise SystemExit(f"error: {exc}")


if __name__ == "__main__":
    run()
