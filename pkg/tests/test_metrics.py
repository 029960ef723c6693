import random

import pytest

from gtl.errors import EmptyTranscription, NonPositiveDuration
from gtl.metrics import (
    backspace_count,
    keystrokes_saved_pct,
    kspc,
    sentence_metrics,
    session_metrics,
    wpm,
)
from gtl.model import Event, EventLog

from conftest import make_event_log, make_record, random_event_log


class TestWpm:
    def test_direct_substitution(self):
        assert wpm(26, 30.0) == pytest.approx(10.0)

    def test_guard_for_short_transcriptions(self):
        assert wpm(1, 10.0) == 0.0
        assert wpm(0, 10.0) == 0.0

    def test_non_positive_duration(self):
        with pytest.raises(NonPositiveDuration):
            wpm(10, 0.0)
        with pytest.raises(NonPositiveDuration):
            wpm(10, -1.0)

    def test_monotonicity(self):
        for t_len in range(2, 60):
            assert wpm(t_len + 1, 20.0) > wpm(t_len, 20.0)
        for s in (5.0, 10.0, 20.0):
            assert wpm(30, s + 1.0) < wpm(30, s)


class TestKeystrokeMetrics:
    def test_no_savings_without_suggestions(self):
        assert keystrokes_saved_pct(20, 20) == 0.0
        assert kspc(20, 20) == 1.0

    def test_savings_with_suggestions(self):
        assert keystrokes_saved_pct(12, 20) == pytest.approx(40.0)
        assert kspc(12, 20) == pytest.approx(0.6)

    def test_empty_transcription(self):
        with pytest.raises(EmptyTranscription):
            keystrokes_saved_pct(3, 0)
        with pytest.raises(EmptyTranscription):
            kspc(3, 0)

    def test_savings_kspc_identity(self):
        # saved + 100*kspc == 100 holds algebraically; in binary floating
        # point it can miss by ~1e-14 (e.g. K=5, |T|=6), so the check is
        # near-exact rather than bitwise
        for t_len in range(1, 200):
            for k in range(0, 2 * t_len, 7):
                saved = keystrokes_saved_pct(k, t_len)
                ratio = kspc(k, t_len)
                assert saved + 100.0 * ratio == pytest.approx(100.0, abs=1e-9)


class TestEventLogMetrics:
    def test_backspace_counts(self, simple_log):
        assert backspace_count(simple_log) == 1
        assert backspace_count(simple_log, 0) == 0
        assert backspace_count(simple_log, 1) == 1

    def test_sentence_metrics_hand_computed(self):
        # SHOWN at 5.0; keys at 6,7,8 (INSERT a, SUGG "bc ", BKSP);
        # SUBMIT at 8.0 -> replay "a" + "bc " minus one char = "abc"
        log = make_event_log([[("INSERT", "a"), ("SUGG", "bc "), ("BKSP", "")]])
        m = sentence_metrics(log, 0)
        assert m.transcribed_len == 3
        assert m.duration_s == pytest.approx(3.0)
        assert m.keystrokes == 3
        assert m.backspace_count == 1
        assert m.wpm == pytest.approx(((3 - 1) * 60) / (5 * 3.0))
        assert m.keystrokes_saved_pct == pytest.approx(100 * (3 - 3) / 3)

    def test_first_key_anchor(self):
        log = make_event_log([[("INSERT", "a"), ("INSERT", "b")]], pre=5.0)
        shown = sentence_metrics(log, 0, "shown")
        first = sentence_metrics(log, 0, "first-key")
        assert shown.duration_s == pytest.approx(2.0)  # SHOWN..SUBMIT
        assert first.duration_s == pytest.approx(1.0)  # first key..SUBMIT
        assert first.wpm > shown.wpm

    def test_session_means_are_unweighted(self):
        log = make_event_log([
            [("INSERT", "a"), ("INSERT", "b"), ("INSERT", "c")],
            [("INSERT", "x"), ("SUGG", "yz ")],
        ])
        rec = make_record(log)
        tm = session_metrics(rec)
        assert len(tm.sentences) == 2
        assert tm.mean_wpm == pytest.approx(
            (tm.sentences[0].wpm + tm.sentences[1].wpm) / 2)
        assert tm.total_backspace_count == 0

    def test_time_translation_invariance(self):
        rng = random.Random(31)

        def outcome(lg, i):
            try:
                return sentence_metrics(lg, i)
            except EmptyTranscription:
                return "empty"  # all-backspace sentences have no metrics

        for _ in range(20):
            log = random_event_log(rng)
            shifted = EventLog(tuple(
                Event(ev.t + 1000.0, ev.kind, ev.text, ev.key_class, ev.produced)
                for ev in log))
            for i in range(len(log.sentences())):
                assert outcome(log, i) == outcome(shifted, i)

    def test_savings_zero_for_insert_only_logs(self):
        log = make_event_log([[("INSERT", c) for c in "hello world"]])
        m = sentence_metrics(log, 0)
        assert m.keystrokes_saved_pct == 0.0
        assert m.kspc == 1.0
