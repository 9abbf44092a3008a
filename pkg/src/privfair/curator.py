"""The trusted third party: answers rule histogram queries under a DP budget.

The curator holds a private copy of the feature data plus the encoded
sensitive groups. Every public answer passes through a DP mechanism; exact
histograms never leave the process (the noiseless stub exists for tests and
must be enabled explicitly). A per-identity ledger enforces sequential
composition, with parallel batches of disjoint predicates charged once at
their maximum epsilon. Disjointness is verified on the curator's own data:
a batch query whose predicate overlaps an earlier one in the same batch is
refused.

Wire protocol: newline-delimited UTF-8 frames, one JSON object per line with
sorted keys. epsilon/delta and answer counts travel as decimal strings to
avoid float round-trip drift. Clause ops ">=" and "!=" are accepted and
canonicalized to negated "<" / "=".
"""

from __future__ import annotations

import hashlib
import json
import socket
import socketserver
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .data import CATEGORICAL, NUMERIC, Dataset, SensitiveTable
from .errors import BudgetRefusal, DataError, MechanismError, ParameterError, ProtocolError
from . import mechanisms as mech
from .tree import RuleClause, SplitClause, rule_mask

SEQUENTIAL = "sequential"
PARALLEL = "parallel"


@dataclass(frozen=True)
class LedgerEntry:
    digest: str
    epsilon: float  # the query's epsilon
    charged: float  # increment actually applied to the spend
    timestamp: float
    composition: str  # "sequential" or "parallel:<batch_id>"


class BudgetLedger:
    """Spend ledger for one client identity; spent never decreases."""

    def __init__(self, total_epsilon: float):
        if total_epsilon <= 0:
            raise ParameterError("total_epsilon must be positive")
        self.total_epsilon = float(total_epsilon)
        self.spent = 0.0
        self.entries: list[LedgerEntry] = []
        self._batch_charged: dict[str, float] = {}

    @property
    def remaining(self) -> float:
        return max(0.0, self.total_epsilon - self.spent)

    def charge(self, digest: str, epsilon: float, composition: str, batch_id: str | None) -> None:
        """Admit and record a charge, or refuse leaving the ledger untouched."""
        if composition == PARALLEL:
            prior = self._batch_charged.get(batch_id, 0.0)
            increment = max(0.0, epsilon - prior)
        else:
            increment = epsilon
        if self.spent + increment > self.total_epsilon + 1e-9:
            raise BudgetRefusal(self.remaining)
        self.spent += increment
        if composition == PARALLEL:
            self._batch_charged[batch_id] = max(self._batch_charged.get(batch_id, 0.0), epsilon)
            label = f"parallel:{batch_id}"
        else:
            label = SEQUENTIAL
        self.entries.append(LedgerEntry(digest, epsilon, increment, time.time(), label))

    def replay(self) -> float:
        total = 0.0
        for entry in self.entries:
            total += entry.charged
        return total


@dataclass(frozen=True)
class CuratorQuery:
    clauses: tuple[RuleClause, ...]  # empty conjunction = tautology
    epsilon: float
    mechanism: str
    delta: float = 0.0
    composition: str = SEQUENTIAL
    batch_id: str | None = None
    identity: str = "default"

    def digest(self) -> str:
        payload = json.dumps(
            {
                "clauses": [clause_to_wire(c) for c in self.clauses],
                "epsilon": repr(float(self.epsilon)),
                "mechanism": self.mechanism,
                "composition": self.composition,
                "batch_id": self.batch_id,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class CuratorAnswer:
    counts: np.ndarray
    k: int
    mechanism: str
    digest: str


class Curator:
    """Holds the sensitive table, answers queries, enforces the budget."""

    def __init__(
        self,
        data: Dataset,
        sensitive: SensitiveTable,
        total_epsilon: float = 1.0,
        seed: int = 0,
        allow_exact: bool = False,
    ):
        if len(sensitive.groups) != data.n:
            raise DataError("sensitive table must align with the curator's data")
        self._data = data
        self._groups = np.asarray(sensitive.groups)
        self.k = sensitive.k
        self._default_budget = float(total_epsilon)
        self._ledgers: dict[str, BudgetLedger] = {}
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
        self._allow_exact = allow_exact
        self._batch_masks: dict[tuple[str, str], np.ndarray] = {}
        self._lock = threading.Lock()

    def ledger(self, identity: str = "default") -> BudgetLedger:
        if identity not in self._ledgers:
            self._ledgers[identity] = BudgetLedger(self._default_budget)
        return self._ledgers[identity]

    def exact_histogram(self, clauses) -> np.ndarray:
        """Per-group counts of the matching instances. Internal only."""
        mask = rule_mask(clauses, self._data)
        return np.bincount(self._groups[mask], minlength=self.k).astype(float)

    def answer(self, query: CuratorQuery) -> CuratorAnswer:
        """Atomic check-charge-sample-reply. Refusals consume no randomness."""
        with self._lock:
            allowed = mech.MECHANISMS + ((mech.EXACT,) if self._allow_exact else ())
            if query.mechanism not in allowed:
                raise MechanismError(f"mechanism {query.mechanism!r} not available")
            if query.epsilon <= 0:
                raise ParameterError("query epsilon must be positive")
            digest = query.digest()
            mask = rule_mask(query.clauses, self._data)  # raises on unknown features

            ledger = self.ledger(query.identity)
            if query.composition == PARALLEL:
                if not query.batch_id:
                    # missing disjointness assertion
                    raise BudgetRefusal(ledger.remaining)
                key = (query.identity, query.batch_id)
                seen = self._batch_masks.get(key)
                if seen is not None and bool((seen & mask).any()):
                    # batch predicates must be disjoint on the curator's data
                    raise BudgetRefusal(ledger.remaining)
            elif query.composition != SEQUENTIAL:
                raise ProtocolError(f"unknown composition class {query.composition!r}")

            ledger.charge(digest, query.epsilon, query.composition, query.batch_id)
            if query.composition == PARALLEL:
                key = (query.identity, query.batch_id)
                seen = self._batch_masks.get(key)
                self._batch_masks[key] = mask if seen is None else (seen | mask)

            exact = np.bincount(self._groups[mask], minlength=self.k).astype(float)
            params = mech.PrivacyParams(query.epsilon, query.delta)
            if query.mechanism == mech.LAPLACE:
                counts = mech.laplace_histogram(exact, params, self._rng)
            elif query.mechanism == mech.GAUSSIAN:
                counts = mech.gaussian_histogram(exact, params, self._rng)
            elif query.mechanism == mech.EXPONENTIAL:
                # candidate answers range from zero to the number of
                # individuals the rule applies to
                counts = mech.exponential_histogram(exact, int(mask.sum()), params, self._rng)
            else:
                counts = mech.exact_histogram_stub(exact)
            return CuratorAnswer(counts, self.k, query.mechanism, digest)


# ---------------------------------------------------------------------------
# Frame encoding

def clause_to_wire(rc: RuleClause) -> dict:
    return {
        "feature": rc.clause.feature,
        "op": "<" if rc.clause.kind == NUMERIC else "=",
        "value": rc.clause.value,
        "negated": bool(rc.negated),
    }


def clause_from_wire(d: dict) -> RuleClause:
    op = d["op"]
    negated = bool(d.get("negated", False))
    if op == ">=":
        op, negated = "<", not negated
    elif op == "!=":
        op, negated = "=", not negated
    if op == "<":
        return RuleClause(SplitClause(d["feature"], NUMERIC, float(d["value"])), negated)
    if op == "=":
        return RuleClause(SplitClause(d["feature"], CATEGORICAL, str(d["value"])), negated)
    raise ProtocolError(f"unknown clause op {op!r}")


def encode_frame(obj: dict) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def decode_frame(line: bytes) -> dict:
    try:
        obj = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed frame: {exc}") from None
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProtocolError("frame is not an object with a 'type' field")
    return obj


def query_to_frame(q: CuratorQuery) -> dict:
    frame = {
        "type": "query",
        "predicate": [clause_to_wire(c) for c in q.clauses],
        "epsilon": repr(float(q.epsilon)),
        "mechanism": q.mechanism,
    }
    if q.delta:
        frame["delta"] = repr(float(q.delta))
    if q.composition == PARALLEL:
        frame["batch_id"] = q.batch_id
    if q.identity != "default":
        frame["identity"] = q.identity
    return frame


def frame_to_query(frame: dict) -> CuratorQuery:
    try:
        clauses = tuple(clause_from_wire(c) for c in frame.get("predicate", []))
        epsilon = float(frame["epsilon"])
        mechanism = str(frame["mechanism"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad query frame: {exc}") from None
    batch_id = frame.get("batch_id")
    return CuratorQuery(
        clauses=clauses,
        epsilon=epsilon,
        mechanism=mechanism,
        delta=float(frame.get("delta", "0") or 0.0),
        composition=PARALLEL if batch_id else SEQUENTIAL,
        batch_id=batch_id,
        identity=str(frame.get("identity", "default")),
    )


def answer_to_frame(a: CuratorAnswer) -> dict:
    return {
        "type": "answer",
        "counts": [repr(float(c)) for c in a.counts],
        "k": a.k,
        "mechanism": a.mechanism,
        "digest": a.digest,
    }


def refusal_frame(remaining: float, digest: str | None = None) -> dict:
    frame = {"type": "refusal", "remaining_epsilon": repr(float(remaining))}
    if digest is not None:
        frame["digest"] = digest
    return frame


def error_frame(message: str) -> dict:
    return {"type": "error", "message": message}


def process_frame(curator: Curator, frame_line: bytes) -> dict:
    """One request frame in, one reply frame out; never raises."""
    try:
        frame = decode_frame(frame_line)
        if frame["type"] != "query":
            raise ProtocolError(f"unexpected frame type {frame['type']!r}")
        query = frame_to_query(frame)
        answer = curator.answer(query)
        return answer_to_frame(answer)
    except BudgetRefusal as exc:
        return refusal_frame(exc.remaining_epsilon)
    except (ProtocolError, MechanismError, ParameterError, DataError, KeyError) as exc:
        return error_frame(str(exc))


# ---------------------------------------------------------------------------
# Transports

class InProcessClient:
    """Direct in-process transport; same contract as the wire client."""

    def __init__(self, curator: Curator, identity: str = "default"):
        self._curator = curator
        self.identity = identity

    def ask(self, query: CuratorQuery) -> CuratorAnswer:
        if query.identity != self.identity:
            query = CuratorQuery(
                query.clauses, query.epsilon, query.mechanism, query.delta,
                query.composition, query.batch_id, self.identity,
            )
        return self._curator.answer(query)


class _CuratorHandler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            line = self.rfile.readline()
            if not line:
                return
            if not line.strip():
                continue
            reply = process_frame(self.server.curator, line)
            self.wfile.write(encode_frame(reply))
            self.wfile.flush()


class CuratorServer(socketserver.ThreadingTCPServer):
    """Serves the wire protocol; queries are totally ordered by the curator lock."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, curator: Curator, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _CuratorHandler)
        self.curator = curator

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


class WireClient:
    """Newline-delimited frame client; raises the same errors as the curator."""

    def __init__(self, host: str, port: int, identity: str = "default", timeout: float = 30.0):
        self.identity = identity
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rb")

    def ask(self, query: CuratorQuery) -> CuratorAnswer:
        if query.identity != self.identity:
            query = CuratorQuery(
                query.clauses, query.epsilon, query.mechanism, query.delta,
                query.composition, query.batch_id, self.identity,
            )
        self._sock.sendall(encode_frame(query_to_frame(query)))
        line = self._file.readline()
        if not line:
            raise ProtocolError("curator closed the connection")
        frame = decode_frame(line)
        if frame["type"] == "answer":
            counts = np.array([float(c) for c in frame["counts"]], dtype=float)
            return CuratorAnswer(counts, int(frame["k"]), frame["mechanism"], frame["digest"])
        if frame["type"] == "refusal":
            raise BudgetRefusal(float(frame["remaining_epsilon"]))
        if frame["type"] == "error":
            raise ProtocolError(frame.get("message", "curator error"))
        raise ProtocolError(f"unexpected frame type {frame['type']!r}")

    def close(self) -> None:
        try:
            self._file.close()
        finally:
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
