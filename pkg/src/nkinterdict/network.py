"""Transmission network data model and parsers.

The model keeps exactly the data the interdiction formulations consume: buses
with aggregated generation bounds and complex demand, lines with a series
admittance, a thermal limit, an angle-difference limit and a failure
probability.  All quantities are per-unit on the system MVA base.

Three input formats are supported:

* a Matpower case subset (``baseMVA``, ``bus``, ``gen``, ``branch`` tables),
* a line-failure probability CSV (``from_bus,to_bus,circuit,probability``),
* a native JSON format that round-trips :class:`Network` exactly.

Networks are immutable; interdiction scenarios are applied functionally via
:func:`apply_scenario`, which never mutates its input.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace

from .errors import DataWarning, DomainError, ParseError, RefError, UsageError

# Angle-difference limit used when a branch carries no usable angmin/angmax
# (Matpower encodes "unconstrained" as 0 or +/-360).
DEFAULT_THETA_MAX = math.pi / 3.0


@dataclass(frozen=True)
class Bus:
    """A network node with aggregated generation bounds and demand (pu)."""

    id: int
    v_lo: float = 0.9
    v_hi: float = 1.1
    pg_lo: float = 0.0
    pg_hi: float = 0.0
    qg_lo: float = 0.0
    qg_hi: float = 0.0
    pd: float = 0.0
    qd: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.v_lo <= self.v_hi):
            raise DomainError(f"bus {self.id}: need 0 < v_lo <= v_hi, got [{self.v_lo}, {self.v_hi}]")
        if self.pg_lo > self.pg_hi:
            raise DomainError(f"bus {self.id}: pg_lo > pg_hi")
        if self.qg_lo > self.qg_hi:
            raise DomainError(f"bus {self.id}: qg_lo > qg_hi")


@dataclass(frozen=True)
class Line:
    """A transmission line with series admittance g + jb (pu).

    ``t`` is the apparent-power thermal limit and ``theta_max`` the symmetric
    angle-difference limit.  ``pr`` is the line's failure probability; freshly
    parsed cases default to ``pr = 1`` (every line equally certain to fail),
    which reduces the weighted problem to its deterministic variant until real
    probability data is attached.
    """

    id: int
    from_bus: int
    to_bus: int
    g: float
    b: float
    t: float
    theta_max: float = DEFAULT_THETA_MAX
    pr: float = 1.0

    def __post_init__(self):
        if self.t <= 0:
            raise DomainError(f"line {self.id}: thermal limit must be positive, got {self.t}")
        if not (0.0 < self.theta_max < math.pi / 2):
            raise DomainError(f"line {self.id}: theta_max must lie in (0, pi/2), got {self.theta_max}")
        if not (0.0 < self.pr <= 1.0):
            raise DomainError(f"line {self.id}: failure probability must lie in (0, 1], got {self.pr}")
        if self.from_bus == self.to_bus:
            raise DomainError(f"line {self.id}: self-loop at bus {self.from_bus}")


@dataclass(frozen=True)
class Network:
    """An immutable transmission network on a common MVA base."""

    base_mva: float
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    _bus_index: dict = field(init=False, repr=False, compare=False)
    _line_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.base_mva <= 0:
            raise DomainError(f"base_mva must be positive, got {self.base_mva}")
        bus_index = {}
        for i, bus in enumerate(self.buses):
            if bus.id in bus_index:
                raise DomainError(f"duplicate bus id {bus.id}")
            bus_index[bus.id] = i
        line_index = {}
        for i, line in enumerate(self.lines):
            if line.id in line_index:
                raise DomainError(f"duplicate line id {line.id}")
            if line.from_bus not in bus_index:
                raise RefError(f"line {line.id} references unknown bus {line.from_bus}")
            if line.to_bus not in bus_index:
                raise RefError(f"line {line.id} references unknown bus {line.to_bus}")
            line_index[line.id] = i
        object.__setattr__(self, "_bus_index", bus_index)
        object.__setattr__(self, "_line_index", line_index)

    # -- lookups ---------------------------------------------------------

    def bus(self, bus_id: int) -> Bus:
        try:
            return self.buses[self._bus_index[bus_id]]
        except KeyError:
            raise RefError(f"unknown bus id {bus_id}") from None

    def line(self, line_id: int) -> Line:
        try:
            return self.lines[self._line_index[line_id]]
        except KeyError:
            raise RefError(f"unknown line id {line_id}") from None

    @property
    def total_pd(self) -> float:
        """Total positive active demand (pu); the ceiling for any load shed."""
        return sum(b.pd for b in self.buses if b.pd > 0)

    def scenario(self, line_ids) -> "Scenario":
        """Build a :class:`Scenario` from line ids, computing its log-probability."""
        ids = tuple(sorted(line_ids))
        if len(set(ids)) != len(ids):
            raise UsageError(f"duplicate line ids in scenario: {line_ids}")
        log_prob = 0.0
        for lid in ids:
            log_prob += math.log(self.line(lid).pr)
        return Scenario(interdicted=ids, log_prob=log_prob)

    def with_probabilities(self, pr_by_line: dict) -> "Network":
        """Return a copy whose lines carry the given failure probabilities."""
        new_lines = []
        for line in self.lines:
            pr = pr_by_line.get(line.id, line.pr)
            new_lines.append(replace(line, pr=pr))
        return Network(self.base_mva, self.buses, tuple(new_lines))

    # -- native JSON format ----------------------------------------------

    def to_json(self) -> str:
        doc = {
            "base_mva": self.base_mva,
            "buses": [
                {
                    "id": b.id, "v_lo": b.v_lo, "v_hi": b.v_hi,
                    "pg_lo": b.pg_lo, "pg_hi": b.pg_hi,
                    "qg_lo": b.qg_lo, "qg_hi": b.qg_hi,
                    "pd": b.pd, "qd": b.qd,
                }
                for b in self.buses
            ],
            "lines": [
                {
                    "id": l.id, "from": l.from_bus, "to": l.to_bus,
                    "g": l.g, "b": l.b, "t": l.t,
                    "theta_max": l.theta_max, "pr": l.pr,
                }
                for l in self.lines
            ],
        }
        return json.dumps(doc, indent=1)


def from_json(text: str) -> Network:
    """Parse the native JSON network format (inverse of :meth:`Network.to_json`)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", line_no=exc.lineno) from None
    try:
        buses = tuple(
            Bus(
                id=int(b["id"]), v_lo=b["v_lo"], v_hi=b["v_hi"],
                pg_lo=b["pg_lo"], pg_hi=b["pg_hi"],
                qg_lo=b["qg_lo"], qg_hi=b["qg_hi"],
                pd=b["pd"], qd=b["qd"],
            )
            for b in doc["buses"]
        )
        lines = tuple(
            Line(
                id=int(l["id"]), from_bus=int(l["from"]), to_bus=int(l["to"]),
                g=l["g"], b=l["b"], t=l["t"],
                theta_max=l["theta_max"], pr=l["pr"],
            )
            for l in doc["lines"]
        )
        return Network(base_mva=doc["base_mva"], buses=buses, lines=lines)
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from None


@dataclass(frozen=True)
class Scenario:
    """A set of exactly k interdicted line ids with its log-probability."""

    interdicted: tuple[int, ...]
    log_prob: float

    def __post_init__(self):
        if len(set(self.interdicted)) != len(self.interdicted):
            raise UsageError(f"duplicate line ids in scenario {self.interdicted}")
        if self.log_prob > 1e-15:
            raise DomainError(f"scenario log-probability must be <= 0, got {self.log_prob}")

    @property
    def k(self) -> int:
        return len(self.interdicted)


@dataclass(frozen=True)
class SubNetwork:
    """A network with a scenario applied: the surviving (operational) lines.

    Holds a reference to the parent :class:`Network`; both are immutable and
    safe to share across workers.
    """

    net: Network
    interdicted: frozenset
    operational: tuple[Line, ...]

    @property
    def buses(self) -> tuple[Bus, ...]:
        return self.net.buses


def apply_scenario(net: Network, scenario: Scenario) -> SubNetwork:
    """Remove the scenario's lines, returning the operational subnetwork.

    The result may be disconnected; islanding is handled by the inner
    problems, not here.
    """
    for lid in scenario.interdicted:
        if lid not in net._line_index:
            raise RefError(f"scenario references unknown line id {lid}")
    gone = frozenset(scenario.interdicted)
    operational = tuple(l for l in net.lines if l.id not in gone)
    return SubNetwork(net=net, interdicted=gone, operational=operational)


# ---------------------------------------------------------------------------
# Matpower case parsing
# ---------------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line if pos < 0 else line[:pos]


def _collect_tables(text: str):
    """Split a Matpower file into scalar assignments and numeric tables."""
    scalars = {}
    tables = {}
    current = None  # (name, rows, start_line)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if current is None:
            if "=" in line and "[" in line:
                name = line.split("=")[0].strip()
                rest = line.split("[", 1)[1]
                current = (name, [], lineno)
                line = rest.strip()
                if not line:
                    continue
            elif "=" in line:
                name, _, value = line.partition("=")
                scalars[name.strip()] = value.strip().rstrip(";").strip()
                continue
            else:
                continue
        # inside a table: accumulate rows until '];'
        name, rows, start = current
        closed = False
        if "]" in line:
            line = line.split("]")[0]
            closed = True
        line = line.strip()
        if line:
            for chunk in line.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                try:
                    rows.append(([float(tok) for tok in chunk.split()], lineno))
                except ValueError:
                    raise ParseError(f"non-numeric entry in table {name}: {chunk!r}", lineno) from None
        if closed:
            tables[name] = rows
            current = None
    if current is not None:
        raise ParseError(f"table {current[0]} not terminated with '];'", current[2])
    return scalars, tables


def _table(tables, name, min_cols, required=True):
    key = f"mpc.{name}"
    if key not in tables:
        if required:
            raise ParseError(f"missing table {key}")
        return []
    rows = tables[key]
    for vals, lineno in rows:
        if len(vals) < min_cols:
            raise ParseError(f"table {key} row has {len(vals)} columns, expected >= {min_cols}", lineno)
    return rows


def parse_matpower(text: str) -> Network:
    """Parse the Matpower case subset into a :class:`Network`.

    Multiple generators at a bus are aggregated by summing their bounds.
    Out-of-service branches (status 0) are dropped.  Branch charging
    susceptance and off-nominal tap ratios are outside the line model used
    here and are ignored with a warning.  A zero rateA (Matpower's
    "unlimited") is replaced by the total system demand, the largest flow any
    line could usefully carry.
    """
    scalars, tables = _collect_tables(text)
    if "mpc.baseMVA" not in scalars:
        raise ParseError("missing mpc.baseMVA")
    try:
        base_mva = float(scalars["mpc.baseMVA"])
    except ValueError:
        raise ParseError(f"invalid mpc.baseMVA: {scalars['mpc.baseMVA']!r}") from None
    if base_mva <= 0:
        raise DomainError(f"baseMVA must be positive, got {base_mva}")

    bus_rows = _table(tables, "bus", 13)
    gen_rows = _table(tables, "gen", 10)
    branch_rows = _table(tables, "branch", 13)

    # bus columns: id type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin
    bus_data = {}
    bus_order = []
    for vals, lineno in bus_rows:
        bid = int(vals[0])
        if bid in bus_data:
            raise ParseError(f"duplicate bus {bid} in bus table", lineno)
        bus_data[bid] = {
            "pd": vals[2] / base_mva, "qd": vals[3] / base_mva,
            "v_hi": vals[11], "v_lo": vals[12],
            "pg_lo": 0.0, "pg_hi": 0.0, "qg_lo": 0.0, "qg_hi": 0.0,
        }
        bus_order.append(bid)

    # gen columns: bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin
    for vals, lineno in gen_rows:
        bid = int(vals[0])
        if bid not in bus_data:
            raise RefError(f"gen table line {lineno} references unknown bus {bid}")
        if vals[7] <= 0:  # out of service
            continue
        d = bus_data[bid]
        d["pg_hi"] += vals[8] / base_mva
        d["pg_lo"] += vals[9] / base_mva
        d["qg_hi"] += vals[3] / base_mva
        d["qg_lo"] += vals[4] / base_mva

    buses = tuple(
        Bus(id=bid,
            v_lo=bus_data[bid]["v_lo"], v_hi=bus_data[bid]["v_hi"],
            pg_lo=bus_data[bid]["pg_lo"], pg_hi=bus_data[bid]["pg_hi"],
            qg_lo=bus_data[bid]["qg_lo"], qg_hi=bus_data[bid]["qg_hi"],
            pd=bus_data[bid]["pd"], qd=bus_data[bid]["qd"])
        for bid in bus_order
    )
    total_pd = sum(b.pd for b in buses if b.pd > 0)
    fallback_t = total_pd if total_pd > 0 else 1.0

    # branch columns: f t r x b rateA rateB rateC ratio angle status angmin angmax
    lines = []
    ignored_charging = 0
    ignored_ratio = 0
    next_id = 1
    for vals, lineno in branch_rows:
        fbus, tbus = int(vals[0]), int(vals[1])
        if fbus not in bus_data:
            raise RefError(f"branch table line {lineno} references unknown bus {fbus}")
        if tbus not in bus_data:
            raise RefError(f"branch table line {lineno} references unknown bus {tbus}")
        if vals[10] == 0:  # status
            continue
        r, x = vals[2], vals[3]
        if vals[4] != 0.0:
            ignored_charging += 1
        if vals[8] not in (0.0, 1.0):
            ignored_ratio += 1
        denom = r * r + x * x
        if denom == 0:
            raise ParseError(f"branch {fbus}-{tbus} has zero impedance", lineno)
        g = r / denom
        b = -x / denom
        rate = vals[5] / base_mva if vals[5] > 0 else fallback_t
        theta_max = _theta_max_from_ang(vals[11], vals[12])
        lines.append(Line(id=next_id, from_bus=fbus, to_bus=tbus,
                          g=g, b=b, t=rate, theta_max=theta_max))
        next_id += 1

    if ignored_charging:
        warnings.warn(f"ignored charging susceptance on {ignored_charging} branch(es)", DataWarning)
    if ignored_ratio:
        warnings.warn(f"ignored off-nominal tap ratio on {ignored_ratio} branch(es)", DataWarning)

    return Network(base_mva=base_mva, buses=buses, lines=tuple(lines))


def _theta_max_from_ang(angmin_deg: float, angmax_deg: float) -> float:
    """Symmetric angle bound from Matpower angmin/angmax columns.

    Matpower marks "no limit" with 0 or +/-360; anything at or beyond 90 deg
    is useless for the formulations here (which need theta_max < pi/2), so
    such branches get the package default.
    """
    mag = max(abs(angmin_deg), abs(angmax_deg))
    if mag <= 0.0 or mag >= 90.0:
        return DEFAULT_THETA_MAX
    return math.radians(mag)


# ---------------------------------------------------------------------------
# Probability CSV parsing
# ---------------------------------------------------------------------------

def circuit_map(net: Network) -> dict:
    """Map (from_bus, to_bus, circuit) -> line id.

    ``circuit`` is the 1-based index among parallel branches with the same
    directed (from, to) pair, in file order.
    """
    counts = {}
    out = {}
    for line in net.lines:
        key = (line.from_bus, line.to_bus)
        counts[key] = counts.get(key, 0) + 1
        out[(line.from_bus, line.to_bus, counts[key])] = line.id
    return out


def parse_probabilities(text: str, net: Network) -> Network:
    """Attach line-failure probabilities from CSV to a copy of ``net``.

    Expects header ``from_bus,to_bus,circuit,probability`` and exactly one
    row per line of the network.  Zero probabilities are rejected: a line
    that cannot fail must simply not be interdicted, and its log-probability
    would be -inf.
    """
    cmap = circuit_map(net)
    rows = text.splitlines()
    if not rows:
        raise ParseError("empty probability file")
    header = [h.strip() for h in rows[0].split(",")]
    if header != ["from_bus", "to_bus", "circuit", "probability"]:
        raise ParseError(f"bad header {rows[0]!r}", line_no=1)
    pr_by_line = {}
    for lineno, raw in enumerate(rows[1:], start=2):
        if not raw.strip():
            continue
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", lineno)
        try:
            fbus, tbus, circuit = int(parts[0]), int(parts[1]), int(parts[2])
            pr = float(parts[3])
        except ValueError:
            raise ParseError(f"non-numeric field in {raw!r}", lineno) from None
        key = (fbus, tbus, circuit)
        if key not in cmap:
            raise RefError(f"line {lineno}: no branch {fbus}-{tbus} circuit {circuit} in network")
        lid = cmap[key]
        if lid in pr_by_line:
            raise ParseError(f"duplicate probability row for branch {fbus}-{tbus} circuit {circuit}", lineno)
        if not (0.0 < pr <= 1.0):
            raise DomainError(f"line {lineno}: probability must lie in (0, 1], got {pr}")
        pr_by_line[lid] = pr
    missing = [l for l in net.lines if l.id not in pr_by_line]
    if missing:
        l = missing[0]
        raise RefError(
            f"probability data missing for {len(missing)} line(s), "
            f"first: id {l.id} ({l.from_bus}-{l.to_bus})"
        )
    return net.with_probabilities(pr_by_line)
