"""Observable-quantity analyses over traces.

The power proxy is the number of wire toggles per tick (a unit-weight
Hamming-distance model); routing and transistor matching are abstracted
into the per-wire delays of the simulation.  Transactions are aligned with
the boundary markers the simulator emits, never by re-alignment heuristics.

The data-independence checks mirror what the logic family promises: under
matched (uniform) delays the toggle count per transaction, the transaction
completion times, and the difference-of-means power series must not depend
on the data values.  A separate check flags signals whose resting wire
levels reveal the transmitted value, the known weakness of the
level-encoded two-phase code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .trace import Trace


class ComparisonError(ValueError):
    """Traces being compared do not come from the same configuration."""


class AnalysisError(ValueError):
    """Analysis preconditions not met (for instance an empty partition)."""


def _boundary_signal(trace: Trace, signal: Optional[str]) -> str:
    if signal is not None:
        return signal
    if trace.gates:
        return trace.gates[-1].output
    marked = sorted({s for _, s, _ in trace.markers})
    if not marked:
        raise AnalysisError("trace has no transaction markers")
    return marked[0]


def _check_same_fabric(traces: Iterable[Trace]) -> None:
    prints = {t.meta.get("fabric", "?") for t in traces}
    if len(prints) > 1:
        raise ComparisonError(f"traces from different configurations: {sorted(prints)}")


def _windows(trace: Trace, boundary: str) -> List[Tuple[int, int]]:
    times = sorted(t for t, s, _ in trace.markers if s == boundary)
    spans = []
    prev = -1
    for t in times:
        spans.append((prev, t))
        prev = t
    return spans


def toggles_per_transaction(
    trace: Trace, boundary: Optional[str] = None, wires: Optional[Sequence[str]] = None
) -> List[int]:
    """Wire toggles inside each completed transaction window."""
    b = _boundary_signal(trace, boundary)
    wset = set(wires) if wires is not None else None
    counts = []
    for lo, hi in _windows(trace, b):
        n = sum(
            1
            for e in trace.events
            if lo < e.time <= hi and (wset is None or e.wire in wset)
        )
        counts.append(n)
    return counts


def toggle_count_profile(
    traces_by_value: Mapping[object, Trace],
    boundary: Optional[str] = None,
    wires: Optional[Sequence[str]] = None,
) -> Dict[object, Tuple[int, ...]]:
    """Per-value toggle counts per transaction; input traces must share a
    configuration and the uniform delay model."""
    _check_same_fabric(traces_by_value.values())
    return {
        value: tuple(toggles_per_transaction(tr, boundary, wires))
        for value, tr in traces_by_value.items()
    }


def timing_spread(
    traces_by_value: Mapping[object, Trace], boundary: Optional[str] = None
) -> int:
    """max - min of transaction completion times across the value groups."""
    _check_same_fabric(traces_by_value.values())
    per_group: Dict[object, List[int]] = {}
    for value, tr in traces_by_value.items():
        b = _boundary_signal(tr, boundary)
        per_group[value] = sorted(t for t, s, _ in tr.markers if s == b)
    if not per_group:
        return 0
    depth = min(len(v) for v in per_group.values())
    spread = 0
    for k in range(depth):
        times = [v[k] for v in per_group.values()]
        spread = max(spread, max(times) - min(times))
    return spread


def power_series(trace: Trace, length: Optional[int] = None) -> List[int]:
    """Toggles per tick from reset to the end of the trace."""
    end = trace.end_time() if length is None else length
    series = [0] * (end + 1)
    for e in trace.events:
        if e.time <= end:
            series[e.time] += 1
    return series


def dpa_difference_of_means(
    traces: Sequence[Trace], signal: str, txn_index: int = 0
) -> List[float]:
    """Mean power series of the value-1 partition minus the value-0 one.

    Traces are partitioned on the decoded value of ``signal`` in
    transaction ``txn_index``; both partitions need at least one trace.
    """
    _check_same_fabric(traces)
    parts: Dict[int, List[Trace]] = {0: [], 1: []}
    for tr in traces:
        values = tr.values_of(signal)
        if txn_index >= len(values):
            raise AnalysisError(
                f"trace has no transaction {txn_index} on {signal}"
            )
        parts[1 if values[txn_index] else 0].append(tr)
    if not parts[0] or not parts[1]:
        raise AnalysisError("a selection partition is empty")
    horizon = max(tr.end_time() for tr in traces)

    def mean(trs: List[Trace]) -> List[float]:
        acc = [0.0] * (horizon + 1)
        for tr in trs:
            for t, n in enumerate(power_series(tr, horizon)):
                acc[t] += n
        return [a / len(trs) for a in acc]

    hi, lo = mean(parts[1]), mean(parts[0])
    return [a - b for a, b in zip(hi, lo)]


def _levels_at_markers(trace: Trace, signal: str) -> List[Tuple[int, Tuple[int, ...]]]:
    """(value, resting wire levels) at each completed transaction."""
    info = trace.signals[signal]
    marks = sorted((t, i) for t, s, i in trace.markers if s == signal)
    values = trace.records.get(signal, [])
    levels = {w: 0 for w in info.wires}
    out = []
    ev_iter = iter(sorted(trace.events, key=lambda e: (e.time,)))
    pending = next(ev_iter, None)
    for t, idx in marks:
        while pending is not None and pending.time <= t:
            if pending.wire in levels:
                levels[pending.wire] = pending.new
            pending = next(ev_iter, None)
        if idx < len(values):
            out.append((values[idx][0], tuple(levels[w] for w in info.wires)))
    return out


def level_value_correlation(trace: Trace, signal: str) -> float:
    """1.0 when some wire's resting level always equals the value (or its
    complement) across transactions, 0.0 otherwise.

    A constant value sequence carries no evidence, so it reports 0.0; feed
    stimuli that exercise both values.
    """
    samples = _levels_at_markers(trace, signal)
    if len({v for v, _ in samples}) < 2:
        return 0.0
    width = len(samples[0][1])
    for w in range(width):
        if all(lv[w] == v for v, lv in samples):
            return 1.0
        if all(lv[w] == (v ^ 1) for v, lv in samples):
            return 1.0
    return 0.0


@dataclass
class LeakReport:
    toggle_counts: Dict[object, Tuple[int, ...]] = field(default_factory=dict)
    toggle_constant: bool = True
    timing_spread_ticks: int = 0
    dpa_series: List[float] = field(default_factory=list)
    dpa_zero: bool = True
    level_risk: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def data_independent(self) -> bool:
        return self.toggle_constant and self.timing_spread_ticks == 0 and self.dpa_zero

    def render_text(self) -> str:
        lines = []
        status = lambda ok: "pass" if ok else "FAIL"
        flat = {str(k): v for k, v in self.toggle_counts.items()}
        lines.append(f"toggle-count constant across values: {status(self.toggle_constant)}")
        for k in sorted(flat):
            lines.append(f"  value {k}: {list(flat[k])}")
        lines.append(
            f"timing spread: {self.timing_spread_ticks} ticks: "
            f"{status(self.timing_spread_ticks == 0)}"
        )
        if self.dpa_series:
            peak = max(abs(x) for x in self.dpa_series)
            lines.append(f"dpa difference-of-means peak: {peak:g}: {status(self.dpa_zero)}")
        for sig in sorted(self.level_risk):
            corr = self.level_risk[sig]
            tag = " (level reveals value)" if corr >= 1.0 else ""
            lines.append(f"level/value correlation {sig}: {corr:.1f}{tag}")
        lines.extend(self.notes)
        return "\n".join(lines)

    def series_csv(self) -> str:
        rows = ["tick,difference"]
        rows += [f"{t},{x:g}" for t, x in enumerate(self.dpa_series)]
        return "\n".join(rows) + "\n"


def analyze(
    traces_by_value: Mapping[object, Trace],
    dpa_traces: Optional[Sequence[Trace]] = None,
    dpa_signal: Optional[str] = None,
    boundary: Optional[str] = None,
) -> LeakReport:
    report = LeakReport()
    report.toggle_counts = toggle_count_profile(traces_by_value, boundary)
    depth = min((len(v) for v in report.toggle_counts.values()), default=0)
    trimmed = {k: v[:depth] for k, v in report.toggle_counts.items()}
    report.toggle_constant = len(set(trimmed.values())) <= 1
    report.timing_spread_ticks = timing_spread(traces_by_value, boundary)
    if dpa_traces and dpa_signal:
        report.dpa_series = dpa_difference_of_means(dpa_traces, dpa_signal)
        report.dpa_zero = all(x == 0 for x in report.dpa_series)
    some_trace = next(iter(traces_by_value.values()), None)
    if some_trace is not None:
        for sig in some_trace.signals:
            if some_trace.records.get(sig):
                report.level_risk[sig] = level_value_correlation(some_trace, sig)
    return report
