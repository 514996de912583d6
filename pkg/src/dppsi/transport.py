"""Channels and run drivers.

A channel moves encoded frames between the two parties.  The in-process
duplex pair and the TCP channel expose the same two methods, and both carry
the actual encoded bytes, so local runs exercise the exact wire path a
networked run does and byte accounting is identical.

The drivers pump the fixed message order (sender set, receiver subsample,
re-encrypted set, index set).  Receive-before-send sequencing on each side
keeps a single-threaded process pair deadlock-free even when messages exceed
socket buffers.
"""

from __future__ import annotations

import logging
import math
import socket
import time
from collections import deque
from dataclasses import dataclass, replace

from .accountant import optimal_pq
from .bench import BenchRecord
from .errors import ParameterError, ProtocolAbort
from .group import Group, make_group
from .inputs import load_items, load_payloads, synthetic_pair
from .mechanisms import MechanismParams
from .protocol import DpIntersection, ReceiverSession, Role, SenderSession
from .rng import RandomSource
from .wire import MAX_FRAME_PAYLOAD, ProtocolMessage

logger = logging.getLogger("dppsi")


@dataclass
class RunConfig:
    """Everything one party needs for a run.

    input_path is this party's item file; receiver_input_path supplies the
    second set for local two-party runs.  When no input files are given,
    synthetic sets of size 2**synthetic_k with the planted overlap ratio are
    generated (deterministically under a fixed seed).

    p_a and q default to the optimal pair for eps_a; setting both overrides
    that, e.g. p_a=1, q=0 turns randomized response off entirely.
    """

    input_path: str | None = None
    payload_path: str | None = None
    eps_a: float = 3.0
    delta_b: float = 1e-10
    p_b: float = 0.9
    seed: int | None = None
    listen: str | None = None
    connect: str | None = None
    receiver_input_path: str | None = None
    group_name: str = "ristretto255"
    synthetic_k: int = 10
    overlap: float = 0.7
    p_a: float | None = None
    q: float | None = None

    def __post_init__(self):
        if not self.eps_a > 0:
            raise ParameterError(f"eps_a must be > 0, got {self.eps_a}")
        if not 0.0 < self.delta_b < 1.0:
            raise ParameterError(f"delta_b must be in (0, 1), got {self.delta_b}")
        if not 0.5 <= self.p_b <= 1.0:
            raise ParameterError(f"p_b must be in [0.5, 1], got {self.p_b}")
        if not 0.0 <= self.overlap <= 1.0:
            raise ParameterError(f"overlap must be in [0, 1], got {self.overlap}")
        if (self.p_a is None) != (self.q is None):
            raise ParameterError("override p_a and q together or not at all")

    def mechanism_params(self) -> MechanismParams:
        if self.p_a is not None and self.q is not None:
            return MechanismParams(p_b=self.p_b, p_a=self.p_a, q=self.q)
        p_a, q = optimal_pq(self.eps_a)
        return MechanismParams(p_b=self.p_b, p_a=p_a, q=q)


# ---------------------------------------------------------------------------
# channels


class DuplexChannel:
    """One endpoint of an in-process pair; frames cross as encoded bytes."""

    def __init__(self, inbox: deque, outbox: deque):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, msg: ProtocolMessage) -> None:
        self._outbox.append(msg.encode())

    def recv(self) -> ProtocolMessage:
        if not self._inbox:
            raise ProtocolAbort("no message pending on in-process channel")
        return ProtocolMessage.decode_frame(self._inbox.popleft())

    def close(self) -> None:
        pass


def duplex_pair() -> tuple[DuplexChannel, DuplexChannel]:
    a_to_b: deque = deque()
    b_to_a: deque = deque()
    return DuplexChannel(b_to_a, a_to_b), DuplexChannel(a_to_b, b_to_a)


class TcpChannel:
    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send(self, msg: ProtocolMessage) -> None:
        try:
            self._sock.sendall(msg.encode())
        except OSError as exc:
            raise ProtocolAbort(f"send failed: {exc}") from None

    def _read_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self._sock.recv(min(n - len(buf), 1 << 20))
            except OSError as exc:
                raise ProtocolAbort(f"receive failed: {exc}") from None
            if not chunk:
                raise ProtocolAbort("peer closed connection mid-run")
            buf.extend(chunk)
        return bytes(buf)

    def recv(self) -> ProtocolMessage:
        length = int.from_bytes(self._read_exact(4), "little")
        if length > MAX_FRAME_PAYLOAD:
            raise ProtocolAbort(f"frame of {length} bytes exceeds sanity cap")
        msg = ProtocolMessage.decode_payload(self._read_exact(length))
        return msg

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "TcpChannel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _parse_address(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ParameterError(f"address must look like host:port, got {address!r}")
    return host or "0.0.0.0", int(port)


def listen_channel(address: str, timeout: float = 60.0) -> TcpChannel:
    """Accept exactly one peer connection."""
    host, port = _parse_address(address)
    server = socket.create_server((host, port))
    server.settimeout(timeout)
    try:
        conn, peer = server.accept()
    except TimeoutError:
        raise ProtocolAbort(f"no peer connected to {address} within {timeout}s") from None
    finally:
        server.close()
    conn.settimeout(timeout)
    logger.info("accepted peer %s", peer)
    return TcpChannel(conn)


def connect_channel(
    address: str, timeout: float = 60.0, retry_interval: float = 0.2
) -> TcpChannel:
    """Connect to a listening peer, retrying until the deadline."""
    host, port = _parse_address(address)
    deadline = time.monotonic() + timeout
    while True:
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
            sock.settimeout(timeout)
            return TcpChannel(sock)
        except OSError as exc:
            if time.monotonic() >= deadline:
                raise ProtocolAbort(f"could not connect to {address}: {exc}") from None
            time.sleep(retry_interval)


# ---------------------------------------------------------------------------
# run drivers


def _streams(cfg: RunConfig) -> tuple[RandomSource, RandomSource, RandomSource]:
    """Per-run random streams: (sender, receiver, data).

    Both processes of a networked run derive the same triple from the shared
    seed and use only their own stream, so local and networked runs consume
    randomness identically.
    """
    base = RandomSource.secure() if cfg.seed is None else RandomSource.seeded(cfg.seed)
    sender_rng, receiver_rng, data_rng = base.spawn(3)
    return sender_rng, receiver_rng, data_rng


def _both_inputs(
    cfg: RunConfig, data_rng: RandomSource
) -> tuple[list[bytes], list[bytes], list[float] | None]:
    if cfg.input_path is None and cfg.receiver_input_path is None:
        x_items, y_items = synthetic_pair(2**cfg.synthetic_k, cfg.overlap, data_rng)
    elif cfg.input_path is not None and cfg.receiver_input_path is not None:
        x_items = load_items(cfg.input_path)
        y_items = load_items(cfg.receiver_input_path)
    else:
        raise ParameterError(
            "a local run needs either no input files (synthetic) or both of them"
        )
    payloads = load_payloads(cfg.payload_path) if cfg.payload_path else None
    return x_items, y_items, payloads


def _observed_quality(
    x_items: list[bytes], y_sub_items: list[bytes], output: list[bytes]
) -> tuple[float, float]:
    """Realized recall/precision of the reported set against ground truth."""
    x_set = set(x_items)
    i_sub = {y for y in y_sub_items if y in x_set}
    out_set = set(output)
    recall = len(out_set & i_sub) / len(i_sub) if i_sub else math.nan
    precision = len(out_set & i_sub) / len(out_set) if out_set else math.nan
    return recall, precision


def _log2_size(n_items: int) -> int:
    return round(math.log2(n_items)) if n_items > 0 else 0


def run_local(
    cfg: RunConfig, group: Group | None = None
) -> tuple[DpIntersection, BenchRecord]:
    """Full protocol with both parties in-process, over a duplex channel."""
    group = group or make_group(cfg.group_name)
    sender_rng, receiver_rng, data_rng = _streams(cfg)
    x_items, y_items, payloads = _both_inputs(cfg, data_rng)
    params = cfg.mechanism_params()

    start = time.perf_counter()
    sender = SenderSession(x_items, params, sender_rng, group=group)
    receiver = ReceiverSession(
        y_items, params, receiver_rng, payloads=payloads, group=group
    )
    sender_chan, receiver_chan = duplex_pair()

    sender_chan.send(sender.round1())
    x_a = receiver_chan.recv()
    receiver_chan.send(receiver.round1())
    receiver_chan.send(receiver.round2(x_a))
    y_b_sub = sender_chan.recv()
    x_ab_pi = sender_chan.recv()
    sender_chan.send(sender.round2(y_b_sub, x_ab_pi))
    result = receiver.finish(receiver_chan.recv())
    runtime = time.perf_counter() - start

    recall, precision = _observed_quality(x_items, receiver.y_sub_items, result.elements)
    record = BenchRecord(
        n=_log2_size(len(x_items)),
        runtime_seconds=runtime,
        comm_megabytes=(result.stats.sent_bytes + result.stats.received_bytes) / 2**20,
        eps_a=cfg.eps_a,
        p_b=cfg.p_b,
        recall_observed=recall,
        precision_observed=precision,
    )
    return result, record


def _open_channel(cfg: RunConfig):
    if (cfg.listen is None) == (cfg.connect is None):
        raise ParameterError("specify exactly one of listen or connect")
    if cfg.listen is not None:
        return listen_channel(cfg.listen)
    return connect_channel(cfg.connect)


def run_networked(
    cfg: RunConfig, role: Role | str, group: Group | None = None
) -> tuple[DpIntersection | None, BenchRecord]:
    """One party of a two-process run.

    The sender returns no intersection (its output is empty by the protocol's
    ideal functionality); both roles return measurements.  On error, a
    best-effort abort frame is sent to the peer before the exception
    propagates.
    """
    role = Role(role)
    group = group or make_group(cfg.group_name)
    sender_rng, receiver_rng, data_rng = _streams(cfg)

    if cfg.input_path is not None:
        items = load_items(cfg.input_path)
    else:
        x_items, y_items = synthetic_pair(2**cfg.synthetic_k, cfg.overlap, data_rng)
        items = x_items if role == Role.SENDER else y_items
    payloads = None
    if role == Role.RECEIVER and cfg.payload_path:
        payloads = load_payloads(cfg.payload_path)
    params = cfg.mechanism_params()

    channel = _open_channel(cfg)
    start = time.perf_counter()
    try:
        if role == Role.SENDER:
            session = SenderSession(items, params, sender_rng, group=group)
            channel.send(session.round1())
            y_b_sub = channel.recv()
            x_ab_pi = channel.recv()
            channel.send(session.round2(y_b_sub, x_ab_pi))
            result = None
            sent, received = session.sent_bytes, session.received_bytes
        else:
            session = ReceiverSession(
                items, params, receiver_rng, payloads=payloads, group=group
            )
            x_a = channel.recv()
            channel.send(session.round1())
            channel.send(session.round2(x_a))
            result = session.finish(channel.recv())
            sent, received = session.sent_bytes, session.received_bytes
    except Exception as exc:
        try:
            channel.send(ProtocolMessage.from_abort(str(exc)))
        except Exception:
            pass
        channel.close()
        raise
    runtime = time.perf_counter() - start
    channel.close()

    record = BenchRecord(
        n=_log2_size(len(items)),
        runtime_seconds=runtime,
        comm_megabytes=(sent + received) / 2**20,
        eps_a=cfg.eps_a,
        p_b=cfg.p_b,
        recall_observed=math.nan,
        precision_observed=math.nan,
    )
    return result, record


def replace_config(cfg: RunConfig, **changes) -> RunConfig:
    return replace(cfg, **changes)
