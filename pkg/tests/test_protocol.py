import math

import pytest

from dppsi import (
    DuplicateItemError,
    GroupElement,
    IndexSet,
    InvalidElementError,
    MechanismParams,
    MessageKind,
    ParameterError,
    Phase,
    PhaseError,
    ProtocolAbort,
    ProtocolMessage,
    RandomSource,
    ReceiverSession,
    Role,
    RunStats,
    SenderSession,
    baseline_dhpsi,
    receiver_finish,
    receiver_round1,
    receiver_round2,
    sender_round1,
    sender_round2,
    setup,
    transcript_bytes,
)
from dppsi.group import TINY_PRIME
from dppsi.protocol import EncryptedSet, Provenance

from helpers import drive_protocol, planted_sets

NOISELESS = MechanismParams(p_b=1.0, p_a=1.0, q=0.0)
NOISY = MechanismParams(p_b=0.8, p_a=0.9, q=0.1)


def make_sessions(tiny, params, seed=5, x_size=12, y_size=16, overlap=6):
    x, y = planted_sets(x_size, y_size, overlap, f"mk{seed}")
    s_rng, r_rng = RandomSource.seeded(seed).spawn(2)
    sender = SenderSession(x, params, s_rng, group=tiny)
    receiver = ReceiverSession(y, params, r_rng, group=tiny)
    return sender, receiver


class TestNoiselessCorrectness:
    def test_equals_baseline(self, tiny):
        x, y = planted_sets(60, 80, 25, "base")
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=101)
        expected = baseline_dhpsi(x, y, group=tiny, rng=RandomSource.seeded(7))
        assert sorted(trace.result.elements) == sorted(expected)
        assert len(trace.result.elements) == 25

    def test_disjoint_sets(self, tiny):
        x, y = planted_sets(20, 20, 0, "disj")
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=3)
        assert trace.result.elements == []
        assert trace.result.stats.dp_size == 0

    def test_identical_sets(self, tiny):
        items = [f"same:{i}".encode() for i in range(30)]
        trace = drive_protocol(items, items, NOISELESS, tiny, seed=4)
        assert sorted(trace.result.elements) == sorted(items)

    def test_unequal_sizes(self, tiny):
        x, y = planted_sets(8, 100, 5, "uneq")
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=6)
        assert len(trace.result.elements) == 5

    def test_empty_sender(self, tiny):
        trace = drive_protocol([], [b"a", b"b"], NOISELESS, tiny, seed=8)
        assert trace.result.elements == []

    def test_empty_receiver(self, tiny):
        trace = drive_protocol([b"a", b"b"], [], NOISELESS, tiny, seed=9)
        assert trace.result.elements == []

    def test_ristretto_small(self, ristretto):
        x, y = planted_sets(15, 15, 7, "r255")
        trace = drive_protocol(x, y, NOISELESS, ristretto, seed=10)
        expected = baseline_dhpsi(x, y, group=ristretto, rng=RandomSource.seeded(11))
        assert sorted(trace.result.elements) == sorted(expected)


class TestMechanismEffects:
    def test_no_subsampling_sends_everything(self, tiny):
        x, y = planted_sets(10, 40, 5, "full")
        trace = drive_protocol(x, y, MechanismParams(1.0, 0.9, 0.1), tiny, seed=12)
        assert trace.result.stats.y_sub_size == 40
        assert trace.messages[1].count == 40

    def test_subsample_rate(self, tiny):
        x, y = planted_sets(5, 400, 0, "rate")
        trace = drive_protocol(x, y, MechanismParams(0.8, 1.0, 0.0), tiny, seed=13)
        sigma = math.sqrt(400 * 0.8 * 0.2)
        assert abs(trace.result.stats.y_sub_size - 320) < 3 * sigma

    def test_report_everything_params(self, tiny):
        x, y = planted_sets(10, 30, 5, "all")
        trace = drive_protocol(x, y, MechanismParams(1.0, 1.0, 1.0), tiny, seed=14)
        assert trace.result.stats.dp_size == 30
        assert sorted(trace.result.elements) == sorted(y)

    def test_output_contained_in_receiver_set(self, tiny):
        x, y = planted_sets(40, 50, 20, "cont")
        trace = drive_protocol(x, y, NOISY, tiny, seed=15)
        assert set(trace.result.elements) <= set(y)

    def test_no_injection_means_only_true_matches(self, tiny):
        x, y = planted_sets(40, 50, 20, "trueonly")
        trace = drive_protocol(x, y, MechanismParams(0.8, 0.7, 0.0), tiny, seed=16)
        assert set(trace.result.elements) <= set(x) & set(y)

    def test_permutation_hides_order_but_keeps_elements(self, tiny):
        x, y = planted_sets(64, 10, 0, "perm")
        params = NOISY
        s_rng, r_rng = RandomSource.seeded(17).spawn(2)
        sender = SenderSession(x, params, s_rng, group=tiny)
        receiver = ReceiverSession(y, params, r_rng, group=tiny)
        x_a = sender.round1()
        receiver.round1()
        x_ab_pi = receiver.round2(x_a)
        expected = tiny.batch_exp(
            [tiny.decode(raw) for raw in x_a.element_encodings()],
            receiver._secret,
        )
        expected_encodings = [e.encoding for e in expected]
        shuffled = x_ab_pi.element_encodings()
        assert sorted(shuffled) == sorted(expected_encodings)
        assert shuffled != expected_encodings  # 1/64! chance of identity shuffle

    def test_permutation_differs_across_seeds(self, tiny):
        # same peer message, two receivers: shuffles must not coincide
        x, y = planted_sets(64, 5, 0, "fresh")
        orders = []
        for seed in (18, 19):
            trace = drive_protocol(x, y, NOISY, tiny, seed=seed)
            ranks = sorted(
                range(64), key=trace.messages[2].element_encodings().__getitem__
            )
            orders.append(tuple(ranks))
        assert orders[0] != orders[1]


class TestCanonicalOrdering:
    def test_round1_independent_of_input_order(self, tiny):
        items = [f"ord:{i}".encode() for i in range(40)]
        msgs = []
        for arrangement in (items, items[::-1]):
            sender = SenderSession(
                arrangement, NOISELESS, RandomSource.seeded(21), group=tiny
            )
            msgs.append(sender.round1().encode())
        assert msgs[0] == msgs[1]

    def test_transmission_follows_hash_order(self, tiny):
        items = [f"s:{i}".encode() for i in range(30)]
        sender = SenderSession(items, NOISELESS, RandomSource.seeded(22), group=tiny)
        sent = sender.round1().element_encodings()
        hashed = sorted(tiny.hash_items(items), key=lambda h: h.point.encoding)
        expected = tiny.batch_exp([h.point for h in hashed], sender._secret)
        assert sent == [e.encoding for e in expected]

    def test_payloads_follow_items(self, tiny):
        # noiseless run: the payload sum must pick exactly the intersection's values
        x, y = planted_sets(10, 20, 4, "pay")
        payloads = [float(2**i) for i in range(len(y))]  # distinct powers: sums are unique
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=23, payloads=payloads)
        by_item = dict(zip(y, payloads))
        assert trace.result.payload_sum == sum(by_item[e] for e in trace.result.elements)


class TestPayloads:
    def test_all_ones_counts_matches(self, tiny):
        x, y = planted_sets(30, 40, 15, "ones")
        trace = drive_protocol(
            x, y, NOISY, tiny, seed=24, payloads=[1.0] * len(y)
        )
        assert trace.result.payload_sum == trace.result.stats.dp_size

    def test_absent_payloads_give_none(self, tiny):
        x, y = planted_sets(10, 10, 5, "nopay")
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=25)
        assert trace.result.payload_sum is None

    def test_empty_report_sums_to_zero(self, tiny):
        x, y = planted_sets(10, 10, 0, "zero")
        trace = drive_protocol(
            x, y, NOISELESS, tiny, seed=26, payloads=[3.5] * len(y)
        )
        assert trace.result.payload_sum == 0.0

    def test_length_mismatch(self, tiny):
        with pytest.raises(ParameterError, match="payloads"):
            ReceiverSession(
                [b"a", b"b"],
                NOISELESS,
                RandomSource.seeded(27),
                payloads=[1.0],
                group=tiny,
            )

    def test_sender_cannot_carry_payloads(self, tiny):
        with pytest.raises(ParameterError):
            setup([b"a"], [1.0], Role.SENDER, NOISELESS, RandomSource.seeded(28), group=tiny)


class TestInputValidation:
    def test_duplicate_sender_items(self, tiny):
        with pytest.raises(DuplicateItemError):
            SenderSession([b"a", b"a"], NOISELESS, RandomSource.seeded(29), group=tiny)

    def test_duplicate_receiver_items(self, tiny):
        with pytest.raises(DuplicateItemError):
            ReceiverSession([b"x", b"x"], NOISELESS, RandomSource.seeded(30), group=tiny)

    def test_baseline_rejects_duplicates(self, tiny):
        with pytest.raises(DuplicateItemError):
            baseline_dhpsi([b"a", b"a"], [b"b"], group=tiny, rng=RandomSource.seeded(31))

    def test_index_set_must_increase(self):
        with pytest.raises(ParameterError):
            IndexSet(indices=(3, 3))
        with pytest.raises(ParameterError):
            IndexSet(indices=(5, 2))
        with pytest.raises(ParameterError):
            IndexSet(indices=(0, 1 << 32))
        assert len(IndexSet(indices=(0, 1, 9))) == 3

    def test_encrypted_set_rejects_duplicates(self):
        e = GroupElement(b"\x07" * 32)
        with pytest.raises(DuplicateItemError):
            EncryptedSet(elements=(e, e), provenance=Provenance.X_A)


class TestPhaseMachine:
    def test_round1_twice(self, tiny):
        sender, _ = make_sessions(tiny, NOISELESS)
        sender.round1()
        with pytest.raises(PhaseError):
            sender.round1()

    def test_sender_round2_before_round1(self, tiny):
        sender, receiver = make_sessions(tiny, NOISELESS)
        with pytest.raises(PhaseError):
            sender.round2(
                ProtocolMessage.from_elements(MessageKind.Y_B_SUB, []),
                ProtocolMessage.from_elements(MessageKind.X_AB_PI, []),
            )

    def test_receiver_round2_before_round1(self, tiny):
        _, receiver = make_sessions(tiny, NOISELESS)
        with pytest.raises(PhaseError):
            receiver.round2(ProtocolMessage.from_elements(MessageKind.X_A, []))

    def test_finish_before_round2(self, tiny):
        _, receiver = make_sessions(tiny, NOISELESS)
        receiver.round1()
        with pytest.raises(PhaseError):
            receiver.finish(ProtocolMessage.from_indices([]))

    def test_subsample_unavailable_before_round1(self, tiny):
        _, receiver = make_sessions(tiny, NOISELESS)
        with pytest.raises(PhaseError):
            receiver.y_sub_items

    def test_completed_session_is_closed(self, tiny):
        x, y = planted_sets(6, 6, 3, "closed")
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=32)
        assert trace.sender.phase == Phase.DONE
        assert trace.receiver.phase == Phase.DONE
        with pytest.raises(PhaseError):
            trace.receiver.finish(ProtocolMessage.from_indices([]))


class TestAbortPaths:
    def _receiver_at_round1(self, tiny):
        _, receiver = make_sessions(tiny, NOISELESS)
        receiver.round1()
        return receiver

    def test_invalid_element_aborts(self, tiny):
        receiver = self._receiver_at_round1(tiny)
        # p - 1 is -1 mod p: never a quadratic residue for this prime
        bad = GroupElement((TINY_PRIME - 1).to_bytes(32, "little"))
        good = tiny.hash_to_group(b"fine")
        msg = ProtocolMessage.from_elements(MessageKind.X_A, [good, bad])
        with pytest.raises(InvalidElementError) as excinfo:
            receiver.round2(msg)
        assert excinfo.value.index == 1
        assert receiver.phase == Phase.DONE
        with pytest.raises(PhaseError):
            receiver.round2(msg)

    def test_out_of_range_value_aborts(self, tiny):
        receiver = self._receiver_at_round1(tiny)
        msg = ProtocolMessage.from_elements(
            MessageKind.X_A, [GroupElement(TINY_PRIME.to_bytes(32, "little"))]
        )
        with pytest.raises(InvalidElementError):
            receiver.round2(msg)

    def test_duplicate_encodings_abort(self, tiny):
        receiver = self._receiver_at_round1(tiny)
        e = tiny.hash_to_group(b"twice")
        msg = ProtocolMessage.from_elements(MessageKind.X_A, [e, e])
        with pytest.raises(DuplicateItemError):
            receiver.round2(msg)
        assert receiver.phase == Phase.DONE

    def test_wrong_kind_aborts(self, tiny):
        receiver = self._receiver_at_round1(tiny)
        with pytest.raises(ProtocolAbort, match="expected X_A"):
            receiver.round2(ProtocolMessage.from_indices([1]))

    def test_abort_frame_propagates_reason(self, tiny):
        receiver = self._receiver_at_round1(tiny)
        with pytest.raises(ProtocolAbort, match="peer aborted: out of memory"):
            receiver.round2(ProtocolMessage.from_abort("out of memory"))
        assert receiver.phase == Phase.DONE

    def test_sender_swapped_messages_abort(self, tiny):
        sender, receiver = make_sessions(tiny, NOISELESS)
        x_a = sender.round1()
        y_b_sub = receiver.round1()
        x_ab_pi = receiver.round2(x_a)
        with pytest.raises(ProtocolAbort, match="expected Y_B_SUB"):
            sender.round2(x_ab_pi, y_b_sub)

    def _receiver_awaiting_indices(self, tiny):
        _, receiver = make_sessions(tiny, NOISELESS, y_size=16)
        sender, _ = make_sessions(tiny, NOISELESS, seed=77)
        x_a = sender.round1()
        receiver.round1()
        receiver.round2(x_a)
        return receiver

    def test_index_out_of_range_aborts(self, tiny):
        receiver = self._receiver_awaiting_indices(tiny)
        with pytest.raises(ProtocolAbort, match="out of range"):
            receiver.finish(ProtocolMessage.from_indices([10**6]))
        assert receiver.phase == Phase.DONE

    def test_non_increasing_indices_abort(self, tiny):
        receiver = self._receiver_awaiting_indices(tiny)
        with pytest.raises(ProtocolAbort, match="bad index set"):
            receiver.finish(ProtocolMessage.from_indices([4, 2]))


class TestAccountingAndDeterminism:
    def test_transcript_formula_on_noisy_run(self, tiny):
        x, y = planted_sets(50, 70, 30, "acct")
        trace = drive_protocol(x, y, NOISY, tiny, seed=33)
        stats = trace.result.stats
        expected = transcript_bytes(len(x), stats.y_sub_size, stats.dp_size)
        assert sum(m.encoded_size for m in trace.messages) == expected
        assert trace.sender.sent_bytes + trace.receiver.sent_bytes == expected
        assert trace.sender.received_bytes + trace.receiver.received_bytes == expected
        assert stats.sent_bytes + stats.received_bytes == expected

    def test_same_seed_same_transcript(self, tiny):
        x, y = planted_sets(30, 40, 12, "det")
        a = drive_protocol(x, y, NOISY, tiny, seed=34)
        b = drive_protocol(x, y, NOISY, tiny, seed=34)
        assert [m.encode() for m in a.messages] == [m.encode() for m in b.messages]
        assert a.result.elements == b.result.elements
        assert a.result.stats == b.result.stats  # wall time excluded from equality

    def test_different_seed_different_secret(self, tiny):
        x, y = planted_sets(10, 10, 5, "seeds")
        a = drive_protocol(x, y, NOISELESS, tiny, seed=35)
        b = drive_protocol(x, y, NOISELESS, tiny, seed=36)
        assert a.messages[0].encode() != b.messages[0].encode()
        assert sorted(a.result.elements) == sorted(b.result.elements)

    def test_stats_equality_ignores_wall_time(self):
        a = RunStats(sent_bytes=1, received_bytes=2, wall_time_seconds=0.5, y_sub_size=3, dp_size=4)
        b = RunStats(sent_bytes=1, received_bytes=2, wall_time_seconds=9.0, y_sub_size=3, dp_size=4)
        assert a == b

    def test_sender_view_fields(self, tiny):
        x, y = planted_sets(20, 30, 10, "view")
        trace = drive_protocol(x, y, NOISELESS, tiny, seed=37)
        assert trace.sender.y_sub_size == 30
        assert trace.sender.intersection_size == 10
        assert trace.sender.dp_size == trace.result.stats.dp_size == 10

    def test_repr_hides_secret(self, tiny):
        sender, receiver = make_sessions(tiny, NOISELESS)
        for session in (sender, receiver):
            text = repr(session)
            assert "secret" not in text.lower()
            assert str(session._secret.value) not in text


class TestFunctionalFace:
    def test_wrappers_run_full_protocol(self, tiny):
        x, y = planted_sets(25, 25, 10, "func")
        base = RandomSource.seeded(38)
        s_rng, r_rng = base.spawn(2)
        sender = setup(x, None, "sender", NOISELESS, s_rng, group=tiny)
        receiver = setup(y, None, "receiver", NOISELESS, r_rng, group=tiny)
        x_a = sender_round1(sender)
        y_b_sub = receiver_round1(receiver)
        x_ab_pi = receiver_round2(receiver, x_a)
        idx = sender_round2(sender, y_b_sub, x_ab_pi)
        result = receiver_finish(receiver, idx)
        assert len(result.elements) == 10

    def test_role_coercion(self, tiny):
        s = setup([b"a"], None, Role.SENDER, NOISELESS, RandomSource.seeded(39), group=tiny)
        assert isinstance(s, SenderSession)
        r = setup([b"a"], None, "receiver", NOISELESS, RandomSource.seeded(40), group=tiny)
        assert isinstance(r, ReceiverSession)


class TestBaseline:
    def test_planted_overlap_large(self, tiny):
        x, y = planted_sets(1000, 1000, 400, "big")
        found = baseline_dhpsi(x, y, group=tiny, rng=RandomSource.seeded(41))
        assert sorted(found) == sorted(set(x) & set(y))

    def test_preserves_receiver_order(self, tiny):
        x = [b"m", b"k", b"z"]
        y = [b"z", b"a", b"m", b"q"]
        found = baseline_dhpsi(x, y, group=tiny, rng=RandomSource.seeded(42))
        assert found == [b"z", b"m"]

    def test_ristretto(self, ristretto):
        x, y = planted_sets(40, 40, 18, "r255b")
        found = baseline_dhpsi(x, y, group=ristretto, rng=RandomSource.seeded(43))
        assert sorted(found) == sorted(set(x) & set(y))
