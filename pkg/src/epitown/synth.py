"""Synthetic town construction.

Builds the full initial state for one run: agents with professions, ages and
employment, households and retirement homes, workplaces and schools, the
leisure network, and the monetary endowment that puts period 0 into a
circular-flow steady state.  All randomness comes from a single seeded
``numpy.random.Generator`` so that two syntheses with the same seed are
byte-identical, independent of the scenario simulated afterwards.
"""

from __future__ import annotations

import math

import numpy as np

from . import epidemic
from .config import (BLUE, CHILD, HEALTH, OWNER, PENSIONER, SERVICE, TEACHER,
                     WHITE, ConfigError, TownConfig)

# location kinds
HOUSEHOLD = 0
RETIREMENT = 1
FACTORY = 2
OFFICE = 3
SCHOOL = 4
HOSPITAL = 5
COMMERCIAL = 6
NONCOMMERCIAL = 7
N_LOC_KINDS = 8

LOC_KIND_NAMES = ("household", "retirement_home", "factory", "office",
                  "school", "hospital", "commercial", "noncommercial")

# firm kinds
F_FACTORY = 0
F_OFFICE = 1
F_COMMERCIAL = 2


class GovernmentLedger:
    """Government savings plus the fiscal purchase rule."""

    __slots__ = ("savings", "g0", "mode", "escheated")

    def __init__(self):
        self.savings = 0.0
        self.g0 = 0.0
        self.mode = "zero-deficit"
        self.escheated = 0.0

    def purchase_budget(self) -> float:
        if self.mode == "fixed":
            return self.g0
        return max(0.0, self.savings)


class Town:
    """Mutable simulation state, stored as parallel numpy arrays."""

    def __init__(self, cfg: TownConfig):
        self.cfg = cfg
        self.n = 0
        self.gov = GovernmentLedger()
        self.policy_state = None
        self.setup_log: list[str] = []

    # ------------------------------------------------------------------
    def _alloc_agents(self, n: int) -> None:
        self.n = n
        i32 = np.int32
        self.age_group = np.zeros(n, dtype=np.int8)
        self.band = np.full(n, -1, dtype=np.int8)
        self.profession = np.zeros(n, dtype=np.int8)
        self.employed = np.zeros(n, dtype=bool)
        self.household_of = np.full(n, -1, dtype=i32)   # household ordinal
        self.residence_loc = np.full(n, -1, dtype=i32)  # location index
        self.workplace_firm = np.full(n, -1, dtype=i32)
        self.workplace_loc = np.full(n, -1, dtype=i32)
        self.class_of = np.full(n, -1, dtype=i32)
        self.chaperone = np.full(n, -1, dtype=i32)
        self.alive = np.ones(n, dtype=bool)
        # money
        self.wallet = np.zeros(n)
        self.m_l = np.zeros(n)
        self.h = np.zeros(n)
        self.goods_budget = np.zeros(n)
        self.window = np.zeros((21, n))
        self.window_sum = np.zeros(n)
        # disease
        self.d_state = np.zeros(n, dtype=np.int8)
        self.severity = np.zeros(n)
        self.course = np.zeros(n, dtype=np.int8)
        self.detected = np.zeros(n, dtype=bool)
        self.unable = np.zeros(n, dtype=bool)
        self.t_infected = np.full(n, -1, dtype=i32)
        self.t_sympt = np.full(n, -1, dtype=i32)
        self.t_next = np.full(n, epidemic.NEVER, dtype=i32)
        self.t_final = np.full(n, -1, dtype=i32)
        self.home_outcome = np.zeros(n, dtype=np.int8)
        self.in_bed = np.zeros(n, dtype=bool)
        self.in_icu = np.zeros(n, dtype=bool)
        self.hospital_of = np.full(n, -1, dtype=i32)
        self.isolated_until = np.zeros(n, dtype=i32)
        self.worked_night = np.zeros(n, dtype=bool)
        self.shift_mask = np.zeros(n, dtype=np.int32)
        self.is_caregiver = np.zeros(n, dtype=bool)
        self.caregiver_of: dict[int, int] = {}
        self.seeded_infections = 0
        # cumulative thwart counts by cause: closed, capacity, unaffordable,
        # friend unavailable
        self.thwart_causes = np.zeros(4, dtype=np.int64)

    # convenience views -------------------------------------------------
    def total_money(self) -> float:
        return (float(np.sum(self.wallet)) + float(np.sum(self.m_l))
                + float(np.sum(self.firm_funds)) + self.gov.savings)

    def infected_count(self) -> int:
        s = self.d_state
        return int(np.count_nonzero((s >= epidemic.EXPOSED) & (s <= epidemic.POST_ICU)))

    def record_income(self, idx, amounts) -> None:
        """Add received money to wallets and the 21-period income window."""
        np.add.at(self.wallet, idx, amounts)
        np.add.at(self.window[self._wpos], idx, amounts)
        np.add.at(self.window_sum, idx, amounts)

    def roll_window(self, t: int) -> None:
        self._wpos = t % 21
        self.window_sum -= self.window[self._wpos]
        self.window[self._wpos] = 0.0


def build_town(cfg: TownConfig, seed: int) -> Town:
    """Synthesize a complete town from one setup seed."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5e7]))
    town = Town(cfg)
    synthesize_population(town, rng)
    build_locations_and_networks(town, rng)
    init_economy(town, rng)
    seed_infection(town, cfg.initial_infected_fraction, rng)
    return town


# ---------------------------------------------------------------------------
# population and households
# ---------------------------------------------------------------------------

def synthesize_population(town: Town, rng: np.random.Generator) -> None:
    cfg = town.cfg
    n = cfg.population
    town._alloc_agents(n)
    town._wpos = 0
    if n == 0:
        _empty_locations(town)
        return

    shares = np.asarray(cfg.professions.shares)
    counts = rng.multinomial(n, shares)
    prof = np.repeat(np.arange(8, dtype=np.int8), counts)
    prof = prof[rng.permutation(n)]
    town.profession = prof

    # ages conditional on the profession's age span
    age_shares = np.asarray(cfg.age_group_shares)
    from .config import PROFESSION_AGE_SPANS
    for p in range(8):
        idx = np.nonzero(prof == p)[0]
        if idx.size == 0:
            continue
        lo, hi = PROFESSION_AGE_SPANS[p]
        w = age_shares[lo:hi + 1]
        w = w / w.sum()
        groups = rng.choice(np.arange(lo, hi + 1), size=idx.size, p=w)
        town.age_group[idx] = groups
    band_map = cfg.band_of_age_group()
    town.band = band_map[town.age_group]

    # initial unemployment per worker profession
    town.employed[np.isin(prof, (BLUE, WHITE, SERVICE, HEALTH, TEACHER))] = True
    for p in (BLUE, WHITE, SERVICE, HEALTH, TEACHER):
        idx = np.nonzero(prof == p)[0]
        k = int(round(cfg.professions.unemployment[p] * idx.size))
        if k > 0:
            jobless = rng.choice(idx, size=k, replace=False)
            town.employed[jobless] = False

    _build_households(town, rng)


def _build_households(town: Town, rng: np.random.Generator) -> None:
    """Instantiate household shells per the configured type shares and fill
    them with age-consistent members.

    The census tables do not balance exactly against the demographic and
    profession tables, so filling is greedy: shells that cannot be staffed
    are dropped, leftover agents get singleton households, and leftover
    children spread over the existing with-children households.
    """
    cfg = town.cfg
    prof = town.profession
    children = list(rng.permutation(np.nonzero(prof == CHILD)[0]))
    adults = list(rng.permutation(np.nonzero(
        np.isin(prof, (BLUE, WHITE, SERVICE, HEALTH, TEACHER, OWNER)))[0]))
    pensioners = list(rng.permutation(np.nonzero(prof == PENSIONER)[0]))

    res = cfg.households.pensioner_residence
    n_rh = int(round(res["retirement_home"] * len(pensioners)))
    n_ig = int(round(res["intergenerational"] * len(pensioners)))
    town.retirement_residents = [int(a) for a in pensioners[:n_rh]]
    ig_pool = pensioners[n_rh:n_rh + n_ig]
    po_pool = pensioners[n_rh + n_ig:]

    H = int(round(cfg.households.per_capita * town.n))
    sh = cfg.households.shares
    want = {k: int(round(v * H)) for k, v in sh.items()}

    hh_members: list[list[int]] = []
    hh_type: list[str] = []
    kid_households: list[int] = []

    def new_hh(kind: str, members: list[int]) -> int:
        hh_members.append([int(m) for m in members])
        hh_type.append(kind)
        return len(hh_members) - 1

    # pensioner-only households; scale the type mix to the available pool
    demand = 2 * want["pensioner_couple"] + want["single_pensioner"]
    pool = len(po_pool)
    n_couple = want["pensioner_couple"]
    if demand > pool:
        n_couple = min(n_couple, int(pool * (2 * want["pensioner_couple"]) / max(demand, 1)) // 2)
    for _ in range(n_couple):
        if len(po_pool) < 2:
            break
        new_hh("pensioner_couple", [po_pool.pop(), po_pool.pop()])
    while po_pool:
        new_hh("single_pensioner", [po_pool.pop()])

    # intergenerational households: 1-2 pensioners + 2 adults (+ children)
    n_ig_child = want["intergenerational_with_children"]
    made = 0
    while ig_pool and adults:
        members = [ig_pool.pop()]
        if ig_pool and rng.random() < 0.5:
            members.append(ig_pool.pop())
        for _ in range(2):
            if adults:
                members.append(adults.pop())
        kind = "intergenerational"
        if made < n_ig_child and children:
            members.append(children.pop())
            kind = "intergenerational_with_children"
        hh = new_hh(kind, members)
        if kind.endswith("children"):
            kid_households.append(hh)
        made += 1

    # family households: with-children shells first so children find homes
    for kind, n_adults in (("couple_with_children", 2), ("single_with_children", 1),
                           ("couple", 2), ("single", 1)):
        for _ in range(want[kind]):
            if len(adults) < n_adults:
                break
            members = [adults.pop() for _ in range(n_adults)]
            actual = kind
            if kind.endswith("children"):
                if children:
                    members.append(children.pop())
                else:
                    actual = "couple" if n_adults == 2 else "single"
            hh = new_hh(actual, members)
            if actual.endswith("children"):
                kid_households.append(hh)

    # leftovers
    leftover_adults = len(adults)
    if leftover_adults:
        town.setup_log.append(
            f"households: {leftover_adults} adults beyond the shell plan "
            f"housed as extra singles")
    while adults:
        new_hh("single", [adults.pop()])
    if children:
        if kid_households:
            targets = rng.integers(0, len(kid_households), size=len(children))
            for kid, ti in zip(children, targets):
                hh_members[kid_households[ti]].append(int(kid))
        elif hh_members:
            targets = rng.integers(0, len(hh_members), size=len(children))
            for kid, ti in zip(children, targets):
                hh_members[ti].append(int(kid))
        else:
            raise ConfigError("cannot house children: no households exist")
        children = []

    town.hh_members = hh_members
    town.hh_type = hh_type
    town.family_households = [i for i, k in enumerate(hh_type)
                              if not k.startswith(("single_pensioner", "pensioner_couple"))]
    for hh, members in enumerate(hh_members):
        for m in members:
            town.household_of[m] = hh


# ---------------------------------------------------------------------------
# locations, workplaces, networks
# ---------------------------------------------------------------------------

def _empty_locations(town: Town) -> None:
    town.hh_members, town.hh_type, town.family_households = [], [], []
    town.retirement_residents = []
    town.loc_kind = np.zeros(0, dtype=np.int8)
    town.loc_theta_std = np.zeros(0)
    town.loc_theta_max = np.zeros(0)
    town.loc_closed = np.zeros(0, dtype=bool)
    town.hh_loc = np.zeros(0, dtype=np.int32)
    town.firm_kind = np.zeros(0, dtype=np.int8)
    town.firm_loc = np.zeros(0, dtype=np.int32)
    town.firm_owner = np.full(0, -1, dtype=np.int32)
    town.firm_funds = np.zeros(0)
    town.firm_price = np.zeros(0)
    town.firm_active = np.zeros(0, dtype=bool)
    town.firm_members = []
    town.week_sales = np.zeros(0)
    town.week_costs = np.zeros(0)
    town.week_guests = np.zeros(0)
    town.day_output = np.zeros(0)
    town.commercial_firms = np.zeros(0, dtype=np.int32)
    town.c_loc = np.zeros(0, dtype=np.int32)
    town.nc_loc = np.zeros(0, dtype=np.int32)
    town.hospital_locs = []
    town.hospital_patients = {}
    town.beds_total = town.icu_total = 0
    town.beds_used = town.icu_used = 0
    town.unemployed_pool = {p: [] for p in (BLUE, WHITE, SERVICE, HEALTH, TEACHER)}
    town.cls_school = np.zeros(0, dtype=np.int32)
    for name in ("f_off", "nc_off", "c_off"):
        setattr(town, name, np.zeros(1, dtype=np.int64))
    for name in ("f_idx", "nc_idx", "c_idx"):
        setattr(town, name, np.zeros(0, dtype=np.int64))
    for name in ("f_w", "nc_u", "c_u"):
        setattr(town, name, np.zeros(0))
    town.nc_edge_active = np.zeros(0, dtype=bool)
    town.c_edge_active = np.zeros(0, dtype=bool)
    town.home_mean = np.zeros(0)


def build_locations_and_networks(town: Town, rng: np.random.Generator) -> None:
    cfg = town.cfg
    if town.n == 0:
        return
    loc = cfg.locations
    prof, employed = town.profession, town.employed

    def n_employed(p):
        return int(np.count_nonzero((prof == p) & employed))

    n_fact = math.ceil(n_employed(BLUE) / loc.workers_per_factory) if n_employed(BLUE) else 0
    n_off = math.ceil(n_employed(WHITE) / loc.workers_per_office) if n_employed(WHITE) else 0
    n_comm = math.ceil(n_employed(SERVICE) / loc.workers_per_commercial_facility) \
        if n_employed(SERVICE) else 0
    n_school = math.ceil(n_employed(TEACHER) / loc.teachers_per_school) \
        if n_employed(TEACHER) else 0
    n_children = int(np.count_nonzero(prof == CHILD))
    if n_children and n_school == 0:
        n_school = 1
    n_hosp = max(1, int(round(loc.hospitals_per_capita * town.n)))
    n_rh = max(1, int(round(loc.retirement_homes_per_capita * town.n)))
    n_nc = n_comm * loc.noncommercial_per_commercial

    kinds = ([HOUSEHOLD] * len(town.hh_members) + [RETIREMENT] * n_rh
             + [FACTORY] * n_fact + [OFFICE] * n_off + [SCHOOL] * n_school
             + [HOSPITAL] * n_hosp + [COMMERCIAL] * n_comm + [NONCOMMERCIAL] * n_nc)
    town.loc_kind = np.asarray(kinds, dtype=np.int8)
    nloc = len(kinds)
    town.loc_theta_std = np.ones(nloc)
    town.loc_theta_max = np.full(nloc, np.inf)
    town.loc_closed = np.zeros(nloc, dtype=bool)

    offs = np.concatenate(([0], np.cumsum([len(town.hh_members), n_rh, n_fact,
                                           n_off, n_school, n_hosp, n_comm, n_nc])))
    town.hh_loc = np.arange(offs[0], offs[1], dtype=np.int32)
    rh_locs = np.arange(offs[1], offs[2], dtype=np.int32)
    fact_locs = np.arange(offs[2], offs[3], dtype=np.int32)
    off_locs = np.arange(offs[3], offs[4], dtype=np.int32)
    school_locs = np.arange(offs[4], offs[5], dtype=np.int32)
    hosp_locs = np.arange(offs[5], offs[6], dtype=np.int32)
    c_locs = np.arange(offs[6], offs[7], dtype=np.int32)
    nc_locs = np.arange(offs[7], offs[8], dtype=np.int32)
    town.c_loc, town.nc_loc = c_locs, nc_locs
    town.school_locs = school_locs

    epi = cfg.epidemic
    town.loc_theta_std[c_locs] = epi.commercial_standard_capacity
    town.loc_theta_max[c_locs] = epi.commercial_standard_capacity * epi.max_capacity_multiplier
    town.loc_theta_std[nc_locs] = epi.noncommercial_standard_capacity
    town.loc_theta_max[nc_locs] = epi.noncommercial_standard_capacity * epi.max_capacity_multiplier

    # residences
    for hh, members in enumerate(town.hh_members):
        for m in members:
            town.residence_loc[m] = town.hh_loc[hh]
    for i, a in enumerate(town.retirement_residents):
        town.residence_loc[a] = rh_locs[i % max(n_rh, 1)]

    # hospitals
    town.hospital_locs = [int(h) for h in hosp_locs]
    town.hospital_patients = {int(h): 0 for h in hosp_locs}
    town.beds_total = int(round(loc.hospital_beds_per_1k * town.n / 1000.0))
    town.icu_total = int(round(loc.icus_per_100k * town.n / 100000.0))
    town.beds_used = town.icu_used = 0

    # firms and workplace assignment
    nfirms = n_fact + n_off + n_comm
    town.firm_kind = np.concatenate([
        np.full(n_fact, F_FACTORY, dtype=np.int8),
        np.full(n_off, F_OFFICE, dtype=np.int8),
        np.full(n_comm, F_COMMERCIAL, dtype=np.int8)])
    town.firm_loc = np.concatenate([fact_locs, off_locs, c_locs]).astype(np.int32) \
        if nfirms else np.zeros(0, dtype=np.int32)
    town.firm_owner = np.full(nfirms, -1, dtype=np.int32)
    town.firm_funds = np.zeros(nfirms)
    town.firm_price = np.zeros(nfirms)
    town.firm_active = np.ones(nfirms, dtype=bool)
    town.firm_members = [[] for _ in range(nfirms)]
    town.week_sales = np.zeros(nfirms)
    town.week_costs = np.zeros(nfirms)
    town.week_guests = np.zeros(nfirms)
    town.day_output = np.zeros(nfirms)
    town.commercial_firms = np.arange(n_fact + n_off, nfirms, dtype=np.int32)

    def assign(p, firm_base, nf):
        workers = rng.permutation(np.nonzero((prof == p) & employed)[0])
        for i, a in enumerate(workers):
            f = firm_base + (i % nf)
            town.workplace_firm[a] = f
            town.workplace_loc[a] = town.firm_loc[f]
            town.firm_members[f].append(int(a))

    if n_fact:
        assign(BLUE, 0, n_fact)
    if n_off:
        assign(WHITE, n_fact, n_off)
    if n_comm:
        assign(SERVICE, n_fact + n_off, n_comm)

    # firm ownership: round-robin so every owner holds at least one firm
    owners = rng.permutation(np.nonzero(prof == OWNER)[0])
    if nfirms and owners.size:
        for f in range(nfirms):
            town.firm_owner[f] = owners[f % owners.size]

    # government staff
    teachers = rng.permutation(np.nonzero((prof == TEACHER) & employed)[0])
    for i, a in enumerate(teachers):
        town.workplace_loc[a] = school_locs[i % max(n_school, 1)]
    hcw = rng.permutation(np.nonzero((prof == HEALTH) & employed)[0])
    for i, a in enumerate(hcw):
        town.workplace_loc[a] = hosp_locs[i % max(n_hosp, 1)]

    # school classes
    kids = rng.permutation(np.nonzero(prof == CHILD)[0])
    n_cls = math.ceil(len(kids) / loc.school_class_size) if len(kids) else 0
    town.cls_school = np.zeros(n_cls, dtype=np.int32)
    for c in range(n_cls):
        town.cls_school[c] = school_locs[c % max(n_school, 1)]
    for i, a in enumerate(kids):
        c = i % max(n_cls, 1)
        town.class_of[a] = c
        town.workplace_loc[a] = town.cls_school[c]

    # unemployed pools
    town.unemployed_pool = {
        p: [int(a) for a in np.nonzero((prof == p) & ~employed)[0]]
        for p in (BLUE, WHITE, SERVICE, HEALTH, TEACHER)}

    _build_leisure_network(town, rng, c_locs, nc_locs)

    # chaperones for under-10 children
    for a in np.nonzero(town.band < 0)[0]:
        if prof[a] == CHILD:
            epidemic._assign_chaperone(town, int(a))


def _build_leisure_network(town: Town, rng, c_locs, nc_locs) -> None:
    cfg = town.cfg
    lp = cfg.leisure
    eligible = np.nonzero(town.band >= 0)[0]
    n = town.n

    # --- symmetric friend edges via stub matching ---
    deg = np.zeros(n, dtype=np.int64)
    deg[eligible] = rng.integers(lp.friends_min, lp.friends_max + 1, size=eligible.size)
    stubs = np.repeat(np.arange(n), deg)
    rng.shuffle(stubs)
    if stubs.size % 2:
        stubs = stubs[:-1]
    a_side, b_side = stubs[0::2], stubs[1::2]
    drawn_pairs = a_side.size
    ok = a_side != b_side
    a_side, b_side = a_side[ok], b_side[ok]
    key = np.minimum(a_side, b_side).astype(np.int64) * n + np.maximum(a_side, b_side)
    _, first = np.unique(key, return_index=True)
    a_side, b_side = a_side[first], b_side[first]
    dropped = drawn_pairs - a_side.size
    if dropped:
        town.setup_log.append(
            f"friend network: dropped {dropped} self/duplicate stub pairs "
            f"of {drawn_pairs} drawn")
    w = rng.normal(lp.friend_weight_mean,
                   lp.weight_sigma_fraction * lp.friend_weight_mean, size=a_side.size)
    w = np.maximum(w, 1e-6)
    src = np.concatenate([a_side, b_side])
    dst = np.concatenate([b_side, a_side])
    ww = np.concatenate([w, w])
    order = np.argsort(src, kind="stable")
    src, dst, ww = src[order], dst[order], ww[order]
    town.f_off = np.concatenate(([0], np.cumsum(np.bincount(src, minlength=n)))).astype(np.int64)
    town.f_idx = dst.astype(np.int64)
    town.f_w = ww

    # --- facility edges ---
    aref = lp.attractiveness_ref
    sig = lp.weight_sigma_fraction
    a_c = rng.normal(lp.attractiveness_mean, sig * lp.attractiveness_mean, size=len(c_locs))
    a_nc = rng.normal(lp.attractiveness_mean, sig * lp.attractiveness_mean, size=len(nc_locs))
    a_c = np.maximum(a_c, 0.05 * lp.attractiveness_mean)
    a_nc = np.maximum(a_nc, 0.05 * lp.attractiveness_mean)
    town.attract_c, town.attract_nc = a_c, a_nc

    c_means = town.cfg.effective_commercial_means() / aref
    nc_means = np.asarray(lp.noncommercial_means) / aref

    def facility_edges(n_fac, attract, means):
        offs = np.zeros(n + 1, dtype=np.int64)
        if n_fac == 0 or eligible.size == 0:
            return offs, np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0, dtype=bool)
        kmax = min(lp.facility_edges_max, n_fac)
        kmin = min(lp.facility_edges_min, kmax)
        counts = rng.integers(kmin, kmax + 1, size=eligible.size)
        offs[eligible + 1] = counts
        offs = np.cumsum(offs)
        idx = np.empty(offs[-1], dtype=np.int64)
        uu = np.empty(offs[-1])
        for i, a in enumerate(eligible):
            k = counts[i]
            targets = rng.choice(n_fac, size=k, replace=False)
            mu = means[town.band[a]]
            wts = np.maximum(rng.normal(mu, sig * mu, size=k), 1e-9)
            lo = offs[a]
            idx[lo:lo + k] = targets
            uu[lo:lo + k] = wts * attract[targets]
        return offs, idx, uu, np.ones(offs[-1], dtype=bool)

    town.nc_off, town.nc_idx, town.nc_u, town.nc_edge_active = \
        facility_edges(len(nc_locs), a_nc, nc_means)
    town.c_off, town.c_idx, town.c_u, town.c_edge_active = \
        facility_edges(len(c_locs), a_c, c_means)

    home_means = np.asarray(lp.home_means)
    town.home_mean = np.zeros(n)
    m = town.band >= 0
    town.home_mean[m] = home_means[town.band[m]]


# ---------------------------------------------------------------------------
# economy initialization and the setup cycle
# ---------------------------------------------------------------------------

def expected_weekly_visits(town: Town) -> np.ndarray:
    """Analytic expected commercial visits per agent and week.

    Prices and saving fractions calibrate against the OBSERVED visit rate,
    i.e. the commercial preference weights with the budget-constraint
    multiplier divided back out: the planning weights are deliberately
    inflated (people would visit more without money constraints) and
    affordability is what curtails realized visits to the observed level.
    The probability that a draw lands on a commercial visit is that share of
    the mean preference mass, times the leisure phases per week (9 for
    weekday workers and employed shift workers, 14 for everyone without a
    work schedule).
    """
    cfg = town.cfg
    lp = cfg.leisure
    mean_edges = (lp.facility_edges_min + lp.facility_edges_max) / 2.0
    mean_friends = (lp.friends_min + lp.friends_max) / 2.0
    c_observed = cfg.effective_commercial_means() / lp.commercial_multiplier
    p_c = np.zeros(len(c_observed))
    for b in range(len(c_observed)):
        f_mean = (mean_friends * lp.friend_weight_mean
                  + mean_edges * lp.noncommercial_means[b]
                  + mean_edges * c_observed[b]
                  + lp.home_means[b])
        p_c[b] = mean_edges * c_observed[b] / f_mean
    out = np.zeros(town.n)
    m = town.band >= 0
    phases = np.where(town.employed | (town.profession == CHILD), 9.0, 14.0)
    out[m] = p_c[town.band[m]] * phases[m]
    return out


def init_economy(town: Town, rng: np.random.Generator) -> None:
    """Prices, saving fractions, funds and the period-0 circular-flow cycle.

    The setup period runs one stylized full working day: wages, transfers
    and the owners' initialization income are paid, consumption is reserved,
    the government's steady purchase ``g0`` is derived, goods are produced
    and the market cleared, and rents flow.  After this cycle total money is
    frozen as the conservation baseline.
    """
    cfg = town.cfg
    if town.n == 0:
        town.baseline_output = 0.0
        town.money_baseline = 0.0
        town.default_price = 0.0
        return
    eco = cfg.economy
    prof_p = cfg.professions
    prof = town.profession
    pi_e = eco.expected_profit_rate

    n_comm = len(town.commercial_firms)
    if n_comm == 0:
        raise ConfigError("town has no commercial leisure facility; "
                          "leisure price undefined")

    # default leisure price from expected industry revenue / expected visits
    visits = expected_weekly_visits(town)
    total_visits = float(np.sum(visits))
    weekly_wage_cost = np.zeros(len(town.firm_kind))
    for f in range(len(town.firm_kind)):
        gross = (prof_p.gross_wages[BLUE], prof_p.gross_wages[WHITE],
                 prof_p.gross_wages[SERVICE])[town.firm_kind[f]]
        weekly_wage_cost[f] = 5.0 * gross * len(town.firm_members[f])
    comm = town.commercial_firms
    industry_revenue = float(np.sum(weekly_wage_cost[comm])) * (1.0 + pi_e)
    if total_visits <= 0:
        raise ConfigError("expected commercial visits are zero; "
                          "leisure price undefined")
    p_bar = industry_revenue / total_visits
    town.default_price = p_bar
    town.firm_price[comm] = p_bar

    # saving fractions h and the initial leisure buffer
    weekly_income = np.zeros(town.n)
    for p in range(8):
        idx = prof == p
        if p == OWNER:
            continue
        u = prof_p.unemployment[p]
        net = prof_p.net_wages[p]
        avg = 5.0 * ((1 - u) * net + u * eco.unemployment_benefit_rate * net) \
            if p in (BLUE, WHITE, SERVICE, HEALTH, TEACHER) else 5.0 * net
        weekly_income[idx] = avg
    owners = np.nonzero(prof == OWNER)[0]
    private_gross_bill = sum(
        prof_p.gross_wages[p] * np.count_nonzero((prof == p) & town.employed)
        for p in (BLUE, WHITE, SERVICE))
    owner_daily_gross = private_gross_bill * pi_e / max(owners.size, 1)
    owner_daily_net = owner_daily_gross * (1.0 - eco.rent_tax_rate)
    weekly_income[owners] = 5.0 * owner_daily_net

    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(weekly_income > 0, visits * p_bar / weekly_income, 0.0)
    h[owners] *= 2.0
    town.h = np.clip(h, 0.0, 0.95)
    # Leisure purses end the setup period at 0.8 of one visit price (doubled
    # for owners): purses saw-tooth between the post-splash residue and the
    # affordability threshold, so their long-run mean sits below the price;
    # 0.82 centers the observed attractor of the inflow/splash dynamics.
    # The setup-day contribution h * m^c tops the purse up to that level.
    target = np.where(visits > 0, 0.82 * p_bar, 0.0)
    target[owners] *= 2.0
    daily_income = weekly_income / 5.0
    daily_income[owners] = owner_daily_net
    town.m_l = np.maximum(target - town.h * daily_income, 0.0)

    # firm funds
    daily_bill = weekly_wage_cost / 5.0
    town.firm_funds = daily_bill.copy()
    town.firm_funds[comm] = (2.0 + pi_e) * np.array(
        [len(town.firm_members[f]) for f in comm]) * prof_p.gross_wages[SERVICE]

    _run_setup_cycle(town, owner_daily_net, owner_daily_gross)


def _run_setup_cycle(town: Town, owner_daily_net: float, owner_daily_gross: float) -> None:
    cfg = town.cfg
    eco = cfg.economy
    prof_p = cfg.professions
    prof = town.profession
    gov = town.gov
    town.roll_window(0)

    # --- pay: one full working day, everyone attends ---
    pay = np.zeros(town.n)
    wedge_total = 0.0
    for p in (BLUE, WHITE, SERVICE):
        m = (prof == p) & town.employed
        pay[m] = prof_p.net_wages[p]
        gross, net = prof_p.gross_wages[p], prof_p.net_wages[p]
        k = int(np.count_nonzero(m))
        np.add.at(town.firm_funds, town.workplace_firm[m], -gross)
        np.add.at(town.week_costs, town.workplace_firm[m], gross)
        wedge_total += (gross - net) * k
    for p in (HEALTH, TEACHER):
        m = (prof == p) & town.employed
        pay[m] = prof_p.net_wages[p]
        gov.savings -= prof_p.net_wages[p] * int(np.count_nonzero(m))
    m = prof == CHILD
    pay[m] = prof_p.net_wages[CHILD]
    gov.savings -= prof_p.net_wages[CHILD] * int(np.count_nonzero(m))
    m = prof == PENSIONER
    pay[m] = prof_p.net_wages[PENSIONER]
    gov.savings -= prof_p.net_wages[PENSIONER] * int(np.count_nonzero(m))
    for p in (BLUE, WHITE, SERVICE, HEALTH, TEACHER):
        m = (prof == p) & ~town.employed
        b = eco.unemployment_benefit_rate * prof_p.net_wages[p]
        pay[m] = b
        gov.savings -= b * int(np.count_nonzero(m))
    owners = prof == OWNER
    pay[owners] = owner_daily_net
    gov.savings += (owner_daily_gross - owner_daily_net) * int(np.count_nonzero(owners))
    gov.savings += wedge_total

    town.wallet += pay
    town.window[0] = pay
    # Four virtual history entries complete the first week's income record.
    # They sit exactly where the next real payments will land (phase 1 for
    # wage and transfer recipients, phase 3 for rent recipients), so each is
    # replaced the moment the real payment arrives and the window always
    # carries one week of income.
    owner_mask = owners
    wage_pay = np.where(owner_mask, 0.0, pay)
    owner_pay = np.where(owner_mask, pay, 0.0)
    for slot in (1, 4, 7, 10):
        town.window[slot] = wage_pay
    for slot in (3, 6, 9, 12):
        town.window[slot] = owner_pay
    town.window_sum = town.window.sum(axis=0)

    # --- consumption reserve ---
    from . import economy as econ
    mc, contrib, goods = econ.consumption_split(town)
    town.wallet -= contrib
    town.m_l += contrib
    town.goods_budget = goods

    # --- g0 from the circular-flow condition ---
    # Steady purchases must lift goods demand to the level at which factory
    # and office revenue exceeds wage costs by the expected profit rate.
    goods_mask = town.firm_kind != F_COMMERCIAL
    goods_firm_costs = float(np.sum(town.week_costs[goods_mask]))
    g0 = goods_firm_costs * (1.0 + eco.expected_profit_rate) - float(np.sum(goods))
    gov.g0 = max(0.0, g0)
    gov.savings += gov.g0

    # --- production and clearing ---
    alpha = (eco.blue_collar_productivity, eco.white_collar_productivity)
    for f in range(len(town.firm_kind)):
        if town.firm_kind[f] == F_FACTORY:
            town.day_output[f] = alpha[0] * len(town.firm_members[f])
        elif town.firm_kind[f] == F_OFFICE:
            town.day_output[f] = alpha[1] * len(town.firm_members[f])
    town.baseline_output = float(np.sum(town.day_output))
    econ.clear_goods_market(town, g_t=gov.g0)
    # setup rents hit wallets only; the window already holds the setup income
    econ.pay_rents(town, record=False)

    town.week_sales[:] = 0.0
    town.week_costs[:] = 0.0
    town.day_output[:] = 0.0
    town.money_baseline = town.total_money()


def seed_infection(town: Town, fraction: float, rng: np.random.Generator) -> None:
    """Expose ``round(fraction * population)`` distinct agents at period 0."""
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError("initial infected fraction must lie in [0, 1]")
    k = int(round(fraction * town.n))
    if k == 0:
        return
    chosen = rng.choice(town.n, size=k, replace=False)
    for a in chosen:
        epidemic.expose(town, int(a), 0, float(rng.random()))
    town.seeded_infections = k
