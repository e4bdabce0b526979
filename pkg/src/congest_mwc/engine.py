"""Round-synchronous message-passing engine with bandwidth accounting.

One word crosses one link per direction per round.  A message declared as
``words`` occupies its link for that many consecutive rounds and is
delivered whole afterwards.  Node programs run in lockstep; sending past
the budget raises, it does not queue.  Links follow the undirected support
of the topology, so directed inputs still talk both ways.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph

__all__ = ["CongestionViolation", "Mail", "NodeCtx", "RoundLog", "run"]


class CongestionViolation(RuntimeError):
    """A link or node was asked to carry more than the model allows."""

    def __init__(self, where: tuple, round_no: int, detail: str):
        super().__init__(
            f"congestion violation at {where} in round {round_no}: {detail}"
        )
        self.where = where
        self.round_no = round_no


@dataclass(frozen=True)
class Mail:
    """One delivered message: sender id and opaque payload."""

    sender: int
    payload: object


@dataclass
class RoundLog:
    """Accounting for one simulation: measured rounds, words, and the
    analytically charged stages that stand in for cited subroutines."""

    rounds: int = 0
    words: int = 0
    max_words_per_edge_round: int = 0
    breakdown: dict = field(default_factory=dict)
    charged: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def add_stage(self, stage: str, rounds: int, words: int,
                  per_round: list | None = None) -> None:
        self.rounds += int(rounds)
        self.words += int(words)
        if words:
            self.max_words_per_edge_round = max(self.max_words_per_edge_round, 1)
        self.breakdown[stage] = self.breakdown.get(stage, 0) + int(rounds)
        if per_round is not None:
            self.trace.extend(int(x) for x in per_round)
        else:
            self.trace.extend([0] * int(rounds))

    def charge(self, stage: str, rounds: int) -> None:
        self.charged[stage] = self.charged.get(stage, 0) + int(rounds)

    def absorb_interleaved(self, stage: str, a: "RoundLog", b: "RoundLog") -> None:
        """Fold in two sub-runs executed in lockstep alternation: odd rounds
        carry one, even rounds the other, so the link budget never doubles."""
        depth = max(a.rounds, b.rounds)
        tr = []
        for i in range(depth):
            tr.append(a.trace[i] if i < len(a.trace) else 0)
            tr.append(b.trace[i] if i < len(b.trace) else 0)
        self.add_stage(stage, 2 * depth, a.words + b.words, tr)
        self.max_words_per_edge_round = max(self.max_words_per_edge_round,
                                            a.max_words_per_edge_round,
                                            b.max_words_per_edge_round)

    def total_rounds(self) -> int:
        """Measured rounds plus every analytically charged stage."""
        return self.rounds + sum(self.charged.values())

    def to_json(self) -> str:
        doc = {
            "rounds": self.rounds,
            "words": self.words,
            "max_words_per_edge_round": self.max_words_per_edge_round,
            "breakdown": dict(sorted(self.breakdown.items())),
            "charged": dict(sorted(self.charged.items())),
            "total_rounds": self.total_rounds(),
            "trace": list(self.trace),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def write_trace_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "words"])
            for i, c in enumerate(self.trace, start=1):
                w.writerow([i, c])


class NodeCtx:
    """Per-node view handed to a program each round."""

    __slots__ = ("node", "round", "inbox", "state", "rng", "neighbors", "_out",
                 "_alarm")

    def __init__(self, node, round_no, inbox, state, rng, neighbors):
        self.node = node
        self.round = round_no
        self.inbox = inbox
        self.state = state
        self.rng = rng
        self.neighbors = neighbors
        self._out: list[tuple[int, object, int]] = []
        self._alarm: int | None = None

    def send(self, to: int, payload: object, words: int = 1) -> None:
        if words < 1:
            raise ValueError(f"message must carry at least 1 word, got {words}")
        self._out.append((int(to), payload, int(words)))

    def alarm(self, round_no: int) -> None:
        """Keep the engine alive (quiet rounds included) until this round."""
        self._alarm = max(self._alarm or 0, int(round_no))


def run(g: Graph, programs, max_rounds: int = 100_000, seed: int = 0):
    """Run node programs in lockstep and return (states, RoundLog).

    ``programs`` is a single callable used at every node or one callable
    per node; each is invoked as ``program(ctx)`` once per round and sends
    through ``ctx.send``.  A message sent in round r is in the receiver's
    inbox in round r+1 (later for multi-word messages).  The run ends when
    nothing is in flight, nothing was sent, and no alarm is pending.
    """
    if callable(programs):
        progs = [programs] * g.n
    else:
        progs = list(programs)
        if len(progs) != g.n:
            raise ValueError(f"need {g.n} programs, got {len(progs)}")
    neighbors = g.link_neighbors
    states = [dict() for _ in range(g.n)]
    rngs = [np.random.default_rng([seed, v]) for v in range(g.n)]
    pending: dict[int, dict[int, list[Mail]]] = {}
    busy_until: dict[tuple[int, int], int] = {}
    on_wire: dict[int, int] = {}
    last_traffic = 0
    wake_until = 0
    r = 0
    while True:
        r += 1
        if r > max_rounds:
            raise RuntimeError(f"max_rounds exhausted after {max_rounds} rounds")
        inboxes = pending.pop(r, {})
        sent_any = False
        for v in range(g.n):
            ctx = NodeCtx(v, r, inboxes.get(v, []), states[v], rngs[v],
                          neighbors[v])
            progs[v](ctx)
            if ctx._alarm:
                wake_until = max(wake_until, ctx._alarm)
            if not ctx._out:
                continue
            seen = set()
            for to, payload, words in ctx._out:
                if to not in ctx.neighbors:
                    raise ValueError(f"node {v} sent to non-neighbor {to}")
                link = (v, to)
                if link in seen:
                    raise CongestionViolation(
                        link, r, "two messages on one link in one round"
                    )
                if busy_until.get(link, 0) >= r:
                    raise CongestionViolation(
                        link, r, "link still carrying a multi-word message"
                    )
                seen.add(link)
                busy_until[link] = r + words - 1
                pending.setdefault(r + words, {}).setdefault(to, []).append(
                    Mail(v, payload)
                )
                for rr in range(r, r + words):
                    on_wire[rr] = on_wire.get(rr, 0) + 1
                last_traffic = max(last_traffic, r + words - 1)
                sent_any = True
        if not pending and not sent_any and r >= wake_until:
            break
    log = RoundLog()
    if last_traffic:
        per_round = [on_wire.get(rr, 0) for rr in range(1, last_traffic + 1)]
        log.add_stage("run", last_traffic, sum(per_round), per_round)
    return states, log
