"""Simulation clock and the per-phase event sequence.

Time is discrete: three phases per day, weeks start on Monday (day index 0 is
Monday 2020-03-02) and period 0 is the setup cycle.  Every phase runs a fixed
sequence: disease transitions, day-start policy activation, phase-1 income
payments, movement (work, school, shifts, leisure), production, transmission,
the phase-3 goods-market clearing, and the Sunday-night weekly close.  Within
one run everything is single-threaded and keyed to one seed, so identical
seed and scenario reproduce bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, economy, epidemic, social
from .config import BLUE, CHILD, HEALTH, SERVICE, TEACHER, WHITE, TownConfig
from .metrics import MetricsCollector, RunMetrics
from .policy import PolicySet, ScenarioSchedule
from .synth import HOSPITAL, SCHOOL, Town, build_town

MONEY_TOLERANCE = 1e-9


class StockFlowError(RuntimeError):
    """Total money drifted: some flow is not a pure transfer."""


@dataclass(frozen=True)
class Clock:
    t: int

    @property
    def day(self) -> int:
        return (self.t - 1) // 3

    @property
    def phase(self) -> int:
        return (self.t - 1) % 3 + 1

    @property
    def weekday(self) -> int:
        return self.day % 7  # 0 = Monday

    @property
    def is_weekday(self) -> bool:
        return self.weekday < 5

    @property
    def is_sunday_night(self) -> bool:
        return self.weekday == 6 and self.phase == 3


class RngStreams:
    """Independent streams per run: setup, kernel dynamics and rare events.

    The setup stream depends only on the run seed, never on the scenario, so
    the same seed always synthesizes the same town.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self.setup_seed = seed
        self.kernel_seed = int(np.random.SeedSequence([seed, 1]).generate_state(1)[0])
        self.events = np.random.default_rng(np.random.SeedSequence([seed, 2]))


class Simulation:
    def __init__(self, cfg: TownConfig, schedule: ScenarioSchedule,
                 fiscal: str = "zero-deficit", seed: int = 0, days: int = 100,
                 event_log=None):
        if fiscal not in ("zero-deficit", "fixed"):
            raise ValueError(f"unknown fiscal mode: {fiscal}")
        self.cfg = cfg
        self.schedule = schedule
        self.fiscal = fiscal
        self.days = days
        self.rng = RngStreams(seed)
        self.event_log = event_log

        self.town: Town = build_town(cfg, self.rng.setup_seed)
        self.town.gov.mode = fiscal
        _kernels.seed_kernels(self.rng.kernel_seed)

        self.policy = PolicySet()
        self.town.policy_state = self.policy
        social.schedule_week(self.town)

        self.metrics = MetricsCollector(days)
        m = self.metrics
        town = self.town
        m.day_infections = town.seeded_infections
        m.cum_infections = town.seeded_infections
        seeded = np.nonzero(town.t_infected == 0)[0]
        m.day_detected = int(np.count_nonzero(town.detected[seeded]))
        m.cum_detected = m.day_detected
        m.add_output(town.baseline_output)
        m.close_day(0, town, town.baseline_output, None)
        m.cum_output = 0.0  # output-lost tracking starts with the first day

        self._audit("setup")

    # ------------------------------------------------------------------
    def run(self) -> RunMetrics:
        for t in range(1, 3 * self.days + 1):
            self.step_phase(t)
        return self.metrics.finalize(self.rng.seed, self.schedule.name,
                                     self.fiscal, self.days,
                                     self.town.baseline_output)

    # ------------------------------------------------------------------
    def step_phase(self, t: int) -> None:
        clock = Clock(t)
        town = self.town
        phase, weekday = clock.phase, clock.weekday
        town.roll_window(t)

        # 1. disease timeline transitions, admissions, deaths
        epidemic.progress_and_hospitalize(town, t, self.policy,
                                          self.rng.events, self.metrics)

        # 2. day start: scheduled policies and caregiver upkeep
        if phase == 1:
            new_policy = self.schedule.policies_at(clock.day)
            if new_policy != self.policy:
                self.policy = new_policy
                town.policy_state = new_policy
            social.refresh_caregivers(town, self.policy.schools_closed)
        elif phase == 2:
            town.worked_night[:] = False

        # 3. income payments and the daily consumption reserve
        scheduled = social.on_shift(town, weekday, phase) & town.alive \
            & town.employed & np.isin(town.profession, (SERVICE, HEALTH))
        if phase == 1:
            scheduled &= ~town.worked_night  # rest after a night shift
        statuses = np.zeros(town.n, dtype=np.int8)
        if scheduled.any():
            statuses = social.classify_shift(town, scheduled, t, self.policy)
        if phase == 1 and clock.is_weekday:
            day_statuses = social.classify_workday(town, t, self.policy)
            statuses = np.where(statuses != economy.OFF, statuses, day_statuses)
            economy.pay_daily_incomes(town, day_statuses)
            economy.pay_shift_wages(town, scheduled, statuses)
            economy.reserve_consumption(town)
        elif scheduled.any():
            economy.pay_shift_wages(town, scheduled, statuses)

        # 4. movement: work, school, shifts, leisure
        loc_now = np.where(town.alive, town.residence_loc, -1).astype(np.int64)
        hospitalized = town.in_bed | town.in_icu
        loc_now[hospitalized] = town.hospital_of[hospitalized]
        on_site = statuses == economy.ON_SITE
        loc_now[on_site & (town.workplace_loc >= 0)] = \
            town.workplace_loc[on_site & (town.workplace_loc >= 0)]
        at_school = np.zeros(town.n, dtype=bool)
        if phase == 1 and clock.is_weekday and not self.policy.schools_closed:
            at_school = town.alive & (town.profession == CHILD) \
                & ~(town.isolated_until > t) & ~social.too_sick_to_work(town) \
                & ~hospitalized & (town.workplace_loc >= 0)
            loc_now[at_school] = town.workplace_loc[at_school]
        elig = social.leisure_eligible(town, weekday, phase, t, on_site, self.policy)
        thwarts = social.run_leisure_phase(town, t, weekday, phase, elig,
                                           loc_now, self.policy)
        self.metrics.add_thwarts(thwarts)
        social.place_small_children(town, loc_now, t)
        town.loc_now = loc_now

        # 5. production
        if phase == 1 and clock.is_weekday:
            before = float(np.sum(town.day_output))
            economy.produce(town, statuses)
            self.metrics.add_output(float(np.sum(town.day_output)) - before)

        # 6. transmission on final occupancy
        self._transmit(t, loc_now)
        if phase == 3:
            town.worked_night = scheduled & (statuses == economy.ON_SITE)

        # 7. goods market clearing and rents (consumption days)
        if phase == 3 and clock.is_weekday:
            g_t = town.gov.purchase_budget()
            economy.clear_goods_market(town, g_t)
            economy.pay_rents(town)

        # 8. Sunday night: profits, prices, labor market, next week's shifts
        if clock.is_sunday_night:
            economy.weekly_close(town, self.rng.events)
            avoid = {int(a) for a in np.nonzero(town.worked_night)[0]}
            social.schedule_week(town, avoid)

        self._audit(f"t={t}")
        if phase == 3:
            self.metrics.close_day(t // 3, town, town.baseline_output, clock.day)

    # ------------------------------------------------------------------
    def _transmit(self, t: int, loc_now: np.ndarray) -> None:
        town = self.town
        s = town.d_state
        infectious = np.nonzero((s >= epidemic.INFECTIOUS_PRESYMPT)
                                & (s <= epidemic.POST_ICU))[0].astype(np.int64)
        if infectious.size == 0:
            return
        nloc = len(town.loc_kind)
        placed = loc_now >= 0
        counts = np.bincount(loc_now[placed], minlength=nloc)
        occ_off = np.zeros(nloc + 1, dtype=np.int64)
        np.cumsum(counts, out=occ_off[1:])
        occ_ids = np.argsort(loc_now, kind="stable")[np.count_nonzero(~placed):]
        occ_ids = occ_ids.astype(np.int64)
        max_occ = int(counts.max()) if nloc else 0

        # per-class occupant lists of children currently at school
        child_at_school = (town.class_of >= 0) & placed \
            & (town.loc_kind[np.maximum(loc_now, 0)] == SCHOOL)
        n_cls = len(town.cls_school)
        cls_counts = np.bincount(town.class_of[child_at_school], minlength=n_cls)
        cls_off = np.zeros(n_cls + 1, dtype=np.int64)
        np.cumsum(cls_counts, out=cls_off[1:])
        in_cls = np.nonzero(child_at_school)[0]
        cls_ids = in_cls[np.argsort(town.class_of[in_cls], kind="stable")].astype(np.int64)

        epi = self.cfg.epidemic
        med = self.cfg.medical
        hygiene = np.full(8, epi.hygiene_factor_default)
        if self.policy.hospital_hygiene is not None:
            hygiene[HOSPITAL] = self.policy.hospital_hygiene
        gamma_eff = self.policy.effective_contacts(epi.max_contacts_per_period)
        thr = epidemic.course_thresholds(med)

        cap = infectious.size * max(gamma_eff, 1)
        out_src = np.empty(cap, dtype=np.int64)
        out_tgt = np.empty(cap, dtype=np.int64)
        out_kind = np.empty(cap, dtype=np.int64)
        kind_counts = np.zeros(8, dtype=np.int64)

        n_new = _kernels.transmit(
            t, occ_off, occ_ids, town.loc_kind, town.loc_theta_std, loc_now,
            infectious, town.d_state,
            epi.infection_probability, gamma_eff, hygiene,
            child_at_school, town.class_of.astype(np.int64), cls_off, cls_ids,
            max_occ,
            town.age_group.astype(np.int64),
            thr["hosp"], thr["crit"], thr["crit_die"], thr["sev_die"],
            epi.detection_threshold, epi.unable_to_work_threshold,
            med.latent_periods, med.incubation_periods, med.mild_duration,
            med.severe_survive_duration, med.severe_death_duration,
            med.critical_survive_duration, med.critical_death_duration,
            town.severity, town.course, town.detected, town.unable,
            town.t_infected, town.t_sympt, town.t_next, town.t_final,
            out_src, out_tgt, out_kind, kind_counts)
        if n_new:
            targets = out_tgt[:n_new]
            n_det = int(np.count_nonzero(town.detected[targets]))
            self.metrics.add_exposures(n_new, n_det, kind_counts)
            if self.event_log is not None:
                for i in range(n_new):
                    self.event_log.append(
                        {"t": t, "source": int(out_src[i]),
                         "target": int(out_tgt[i]), "kind": int(out_kind[i])})

    # ------------------------------------------------------------------
    def _audit(self, where: str) -> None:
        town = self.town
        total = town.total_money()
        base = town.money_baseline
        tol = MONEY_TOLERANCE * max(abs(base), 1.0)
        if abs(total - base) > tol:
            raise StockFlowError(
                f"money stock drifted at {where}: total {total!r} vs "
                f"baseline {base!r} (|drift| {abs(total - base):.3e} > {tol:.3e})")


def sphere_of(town: Town, agent: int, t: int, policy: PolicySet) -> str:
    """Contact context of one agent at one period (diagnostic helper).

    Mirrors the engine's placement rules without executing leisure matching:
    agents in a leisure phase report "leisure" rather than a resolved venue.
    """
    clock = Clock(t)
    if not town.alive[agent]:
        return "none"
    if town.in_bed[agent] or town.in_icu[agent]:
        return "hospital"
    if town.isolated_until[agent] > t:
        return "isolated-home"
    prof = int(town.profession[agent])
    if clock.phase == 1 and town.worked_night[agent]:
        return "home"
    scheduled = bool(social.on_shift(town, clock.weekday, clock.phase)[agent]) \
        and town.employed[agent] and prof in (SERVICE, HEALTH)
    if scheduled:
        st = social.classify_shift(
            town, np.asarray([i == agent for i in range(town.n)]), t, policy)
        return "shift" if st[agent] == economy.ON_SITE else "home"
    if clock.phase == 1 and clock.is_weekday:
        if prof == CHILD and not policy.schools_closed \
                and not social.too_sick_to_work(town)[agent]:
            return "school"
        if prof in (BLUE, WHITE, TEACHER) and town.employed[agent]:
            st = social.classify_workday(town, t, policy)[agent]
            if st == economy.ON_SITE:
                return "work"
            if st in (economy.TELEWORK, economy.TELEWORK_CARE):
                return "telework"
            return "home"
    on_site = np.zeros(town.n, dtype=bool)
    elig = social.leisure_eligible(town, clock.weekday, clock.phase, t,
                                   on_site, policy)
    if elig[agent]:
        return "leisure"
    return "home"
