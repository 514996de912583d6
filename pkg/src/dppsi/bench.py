"""Benchmark sweep over power-of-two input sizes."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

from .errors import DpPsiError

logger = logging.getLogger("dppsi")

# communication doubles with the input size; wide runtime band absorbs timer noise
COMM_RATIO_BAND = (1.9, 2.1)
RUNTIME_RATIO_MAX = 2.6


@dataclass(frozen=True)
class BenchRecord:
    """One measured protocol run.  n is the log2 of the input size."""

    n: int
    runtime_seconds: float
    comm_megabytes: float
    eps_a: float
    p_b: float
    recall_observed: float
    precision_observed: float


def to_csv(records: list[BenchRecord], path_or_file) -> None:
    """Columns: k,runtime_s,comm_MB,recall,precision."""

    def _write(fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["k", "runtime_s", "comm_MB", "recall", "precision"])
        for r in records:
            writer.writerow(
                [
                    r.n,
                    f"{r.runtime_seconds:.6f}",
                    f"{r.comm_megabytes:.6f}",
                    f"{r.recall_observed:.6f}",
                    f"{r.precision_observed:.6f}",
                ]
            )

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def check_scaling(records: list[BenchRecord]) -> None:
    """Communication must double per step (a closed-form property of the
    transcript); runtime growth beyond linear-ish is only warned about, since
    wall clocks are noisy."""
    for prev, cur in zip(records, records[1:]):
        ratio = cur.comm_megabytes / prev.comm_megabytes
        if not COMM_RATIO_BAND[0] <= ratio <= COMM_RATIO_BAND[1]:
            raise DpPsiError(
                f"communication ratio {ratio:.3f} from k={prev.n} to k={cur.n} "
                f"outside {COMM_RATIO_BAND}"
            )
        runtime_ratio = cur.runtime_seconds / prev.runtime_seconds
        if runtime_ratio > RUNTIME_RATIO_MAX:
            logger.warning(
                "runtime grew %.2fx from k=%d to k=%d (expected <= %.1fx)",
                runtime_ratio,
                prev.n,
                cur.n,
                RUNTIME_RATIO_MAX,
            )


def bench_sweep(k_min: int, k_max: int, cfg, out_path=None) -> list[BenchRecord]:
    """Run the full protocol once per k in [k_min, k_max] on synthetic inputs.

    Uses cfg's privacy parameters and seed; input files in cfg are ignored.
    Writes CSV when out_path is given.  Raises if communication does not
    scale linearly in the input size.
    """
    from .transport import replace_config, run_local  # deferred to avoid cycle
    from .wire import transcript_bytes

    if not 0 <= k_min <= k_max:
        raise DpPsiError(f"need 0 <= k_min <= k_max, got {k_min}..{k_max}")
    records = []
    for k in range(k_min, k_max + 1):
        run_cfg = replace_config(
            cfg,
            input_path=None,
            receiver_input_path=None,
            payload_path=None,
            synthetic_k=k,
        )
        result, record = run_local(run_cfg)
        stats = result.stats
        expected = transcript_bytes(2**k, stats.y_sub_size, stats.dp_size)
        if stats.sent_bytes + stats.received_bytes != expected:
            raise DpPsiError(
                f"k={k}: transcript was {stats.sent_bytes + stats.received_bytes} "
                f"bytes, formula says {expected}"
            )
        logger.info(
            "k=%d runtime=%.3fs comm=%.3fMB recall=%.4f precision=%.4f",
            k,
            record.runtime_seconds,
            record.comm_megabytes,
            record.recall_observed,
            record.precision_observed,
        )
        records.append(record)
    check_scaling(records)
    if out_path is not None:
        to_csv(records, out_path)
    return records


def per_element_runtime(record: BenchRecord) -> float:
    return record.runtime_seconds / 2.0**record.n
