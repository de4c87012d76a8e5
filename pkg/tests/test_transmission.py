"""Contact-kernel oracles on hand-built location worlds."""

import numpy as np
import pytest

from epitown import _kernels, default_config
from epitown.epidemic import course_thresholds
from epitown.synth import HOUSEHOLD, SCHOOL


def _world(n_agents, loc_of, loc_kinds, infectious, gamma=10, beta=0.095,
           theta_std=None, class_of=None, cls_groups=None, hygiene=None,
           seed=42):
    """Run one transmission pass over explicit arrays; returns exposures."""
    cfg = default_config()
    med = cfg.medical
    thr = course_thresholds(med)
    n_loc = len(loc_kinds)
    loc_of = np.asarray(loc_of, dtype=np.int64)
    placed = loc_of >= 0
    counts = np.bincount(loc_of[placed], minlength=n_loc)
    occ_off = np.zeros(n_loc + 1, dtype=np.int64)
    np.cumsum(counts, out=occ_off[1:])
    occ_ids = np.argsort(loc_of, kind="stable")[np.count_nonzero(~placed):]
    occ_ids = occ_ids.astype(np.int64)

    d_state = np.zeros(n_agents, dtype=np.int8)
    d_state[infectious] = 2  # infectious, presymptomatic
    is_child = np.zeros(n_agents, dtype=bool)
    class_arr = np.full(n_agents, -1, dtype=np.int64)
    if class_of is not None:
        for a, c in class_of.items():
            class_arr[a] = c
            is_child[a] = True
    n_cls = 0 if cls_groups is None else len(cls_groups)
    cls_off = np.zeros(n_cls + 1, dtype=np.int64)
    members = []
    for c in range(n_cls):
        cls_off[c + 1] = cls_off[c] + len(cls_groups[c])
        members.extend(cls_groups[c])
    cls_ids = np.asarray(members, dtype=np.int64)

    sev = np.zeros(n_agents)
    course = np.zeros(n_agents, dtype=np.int8)
    det = np.zeros(n_agents, dtype=bool)
    unable = np.zeros(n_agents, dtype=bool)
    i32 = np.int32
    t_inf = np.full(n_agents, -1, i32)
    t_sym = np.full(n_agents, -1, i32)
    t_next = np.full(n_agents, 2**31 - 1, i32)
    t_fin = np.full(n_agents, -1, i32)
    cap = max(1, len(infectious) * gamma)
    out_src = np.empty(cap, dtype=np.int64)
    out_tgt = np.empty(cap, dtype=np.int64)
    out_kind = np.empty(cap, dtype=np.int64)
    kc = np.zeros(8, dtype=np.int64)
    _kernels.seed_kernels(seed)
    n_new = _kernels.transmit(
        1, occ_off, occ_ids, np.asarray(loc_kinds, dtype=np.int8),
        np.asarray(theta_std if theta_std is not None else np.ones(n_loc)),
        loc_of, np.asarray(infectious, dtype=np.int64), d_state,
        beta, gamma, np.asarray(hygiene if hygiene is not None else np.ones(8)),
        is_child, class_arr, cls_off, cls_ids, int(counts.max()),
        np.full(n_agents, 8, dtype=np.int64),
        thr["hosp"], thr["crit"], thr["crit_die"], thr["sev_die"],
        cfg.epidemic.detection_threshold, cfg.epidemic.unable_to_work_threshold,
        med.latent_periods, med.incubation_periods, med.mild_duration,
        med.severe_survive_duration, med.severe_death_duration,
        med.critical_survive_duration, med.critical_death_duration,
        sev, course, det, unable, t_inf, t_sym, t_next, t_fin,
        out_src, out_tgt, out_kind, kc)
    return n_new, out_tgt[:n_new], d_state, kc


def test_zero_infectious_zero_exposures():
    n, *_ = _world(5, [0] * 5, [HOUSEHOLD], infectious=[])
    assert n == 0


def test_lonely_infectious_zero_exposures():
    n, *_ = _world(1, [0], [HOUSEHOLD], infectious=[0])
    assert n == 0


def test_small_location_contacts_everyone():
    # 3 others with certain transmission: all three convert
    n, targets, _, _ = _world(4, [0, 0, 0, 0], [HOUSEHOLD], infectious=[0],
                              beta=1.0)
    assert n == 3
    assert set(targets.tolist()) == {1, 2, 3}


def test_household_secondary_exposure_rate():
    """Mean secondary exposures at a household of size 4 equal
    min(gamma, 3) x 0.095 within 1 % (one million contact trials)."""
    k = 333_334
    n_agents = 4 * k
    loc_of = np.repeat(np.arange(k), 4)
    infectious = np.arange(0, n_agents, 4)
    n, _, _, _ = _world(n_agents, loc_of, [HOUSEHOLD] * k,
                        infectious=infectious.tolist(), seed=99)
    mean = n / k
    expect = 3 * 0.095
    assert abs(mean - expect) / expect < 0.01


def test_school_contact_rule():
    """An infectious child contacts gamma-1 classmates plus one random
    person at the school."""
    # school: 22 classmates in class 0, another class of 22, one teacher
    n_agents = 45
    loc_of = [0] * 45
    class_of = {a: 0 for a in range(22)}
    class_of.update({a: 1 for a in range(22, 44)})
    cls_groups = [list(range(22)), list(range(22, 44))]
    n, targets, _, _ = _world(n_agents, loc_of, [SCHOOL], infectious=[0],
                              beta=1.0, class_of=class_of,
                              cls_groups=cls_groups)
    targets = set(targets.tolist())
    assert n == 10  # gamma - 1 classmates + 1 school-wide
    classmates = targets & set(range(1, 22))
    assert len(classmates) >= 9


def test_crowding_scales_probability():
    """Expected exposures double when a leisure facility holds twice its
    standard capacity."""
    from epitown.synth import COMMERCIAL
    k = 60_000
    per_loc = 16
    n_agents = per_loc * k
    loc_of = np.repeat(np.arange(k), per_loc)
    infectious = np.arange(0, n_agents, per_loc)
    n2, _, _, _ = _world(n_agents, loc_of, [COMMERCIAL] * k,
                         infectious=infectious.tolist(),
                         theta_std=np.full(k, 8.0), seed=1)
    mean = n2 / k
    expect = 10 * 0.19  # 10 contacts at beta * 16/8
    assert abs(mean - expect) / expect < 0.02


def test_hygiene_policy_reduces_hospital_risk():
    from epitown.synth import HOSPITAL
    k = 40_000
    n_agents = 12 * k
    loc_of = np.repeat(np.arange(k), 12)
    infectious = np.arange(0, n_agents, 12)
    hygiene = np.ones(8)
    hygiene[HOSPITAL] = 0.1
    n, _, _, _ = _world(n_agents, loc_of, [HOSPITAL] * k,
                        infectious=infectious.tolist(), hygiene=hygiene,
                        seed=3)
    mean = n / k
    expect = 10 * 0.0095
    assert abs(mean - expect) / expect < 0.05


def test_recovered_not_reinfected():
    n_agents = 4
    n, targets, d_state, _ = _world(n_agents, [0] * 4, [HOUSEHOLD],
                                    infectious=[0], beta=1.0)
    # only susceptible targets convert (guarded by the state check)
    assert set(targets.tolist()) == {1, 2, 3}


class TestTriage:
    def _hot_town(self, beds_per_1k, icus_per_100k):
        import dataclasses
        cfg = default_config()
        loc = dataclasses.replace(cfg.locations,
                                  hospital_beds_per_1k=beds_per_1k,
                                  icus_per_100k=icus_per_100k)
        cfg = cfg.replace(population=3000, initial_infected_fraction=0.0,
                          locations=loc)
        from epitown.synth import build_town
        return build_town(cfg, seed=5)

    def test_critical_without_icu_dies_instantly(self):
        from epitown import epidemic
        town = self._hot_town(beds_per_1k=8, icus_per_100k=0.001)
        assert town.icu_total == 0
        rng = np.random.default_rng(1)
        a = 10
        g = town.age_group[a]
        thr = course_thresholds(town.cfg.medical)
        epidemic.expose(town, a, 0, float(1.0 - 1e-9))  # certain critical-die
        assert town.course[a] in (epidemic.CRITICAL_SURVIVE, epidemic.CRITICAL_DIE)
        # walk the timeline to admission
        for t in (town.t_infected[a] + 13, town.t_sympt[a],
                  town.t_sympt[a] + 12):
            town.t_next[a] = t
            epidemic.progress_and_hospitalize(town, t, None, rng)
        assert town.d_state[a] == epidemic.DEAD


    def test_severe_with_bed_admitted(self):
        from epitown import epidemic
        town = self._hot_town(beds_per_1k=8, icus_per_100k=36.6)
        rng = np.random.default_rng(1)
        a = 11
        thr = course_thresholds(town.cfg.medical)
        g = town.age_group[a]
        sigma = (thr["hosp"][g] + thr["sev_die"][g]) / 2  # severe survivor
        epidemic.expose(town, a, 0, float(sigma))
        assert town.course[a] == epidemic.SEVERE_SURVIVE
        t = int(town.t_sympt[a] + 12)
        town.d_state[a] = epidemic.SYMPTOMATIC
        town.t_next[a] = t
        epidemic.progress_and_hospitalize(town, t, None, rng)
        assert town.d_state[a] == epidemic.HOSPITAL
        assert town.beds_used == 1
        assert town.hospital_of[a] >= 0

    def test_severe_without_bed_band(self):
        """With no beds, the lower 40 % of the severe band survives at home
        and recovers on schedule."""
        from epitown import epidemic
        town = self._hot_town(beds_per_1k=0.001, icus_per_100k=36.6)
        assert town.beds_total == 0
        rng = np.random.default_rng(1)
        med = town.cfg.medical
        thr = course_thresholds(med)
        a, b = 12, 13
        for agent, frac in ((a, 0.2), (b, 0.8)):
            g = town.age_group[agent]
            lo, hi = thr["hosp"][g], thr["crit"][g]
            epidemic.expose(town, agent, 0, float(lo + frac * (hi - lo)))
            town.d_state[agent] = epidemic.SYMPTOMATIC
            t = int(town.t_sympt[agent] + 12)
            town.t_next[agent] = t
            epidemic.progress_and_hospitalize(town, t, None, rng)
        assert town.d_state[a] == epidemic.SYMPTOMATIC  # no bed, stays home
        assert town.home_outcome[a] == epidemic.HOME_RECOVER
        assert town.t_final[a] == town.t_sympt[a] + med.severe_survive_duration
        assert town.home_outcome[b] == epidemic.HOME_DIE
        assert town.t_final[b] == town.t_sympt[b] + med.severe_death_duration

    def test_occupancy_never_exceeds_capacity(self):
        import dataclasses
        from epitown import scenario_schedule
        from epitown.engine import Simulation
        cfg = default_config()
        loc = dataclasses.replace(cfg.locations, hospital_beds_per_1k=0.7,
                                  icus_per_100k=3.5)
        cfg = cfg.replace(population=4000, initial_infected_fraction=0.03,
                          locations=loc)
        sim = Simulation(cfg, scenario_schedule("none"), seed=2, days=21)
        town = sim.town
        for t in range(1, 64):
            sim.step_phase(t)
            assert 0 <= town.beds_used <= town.beds_total
            assert 0 <= town.icu_used <= town.icu_total
        assert sim.metrics.cum_deaths > 0  # capacity was binding


class TestInheritance:
    def test_estate_transfers_and_money_conserved(self):
        from epitown import epidemic
        from epitown.synth import build_town
        cfg = default_config().replace(population=3000,
                                       initial_infected_fraction=0.0)
        town = build_town(cfg, seed=8)
        rng = np.random.default_rng(4)
        a = int(np.nonzero(town.profession == 7)[0][0])  # a firm owner
        owned_before = set(np.nonzero(town.firm_owner == a)[0].tolist())
        assert owned_before
        town.wallet[a] = 3.2
        town.m_l[a] = 0.8
        total_before = town.total_money()
        wallet_sum_before = float(np.sum(town.wallet))
        town.alive[a] = False
        town.d_state[a] = epidemic.DEAD
        epidemic.resolve_death(town, a, rng)
        assert town.wallet[a] == 0.0 and town.m_l[a] == 0.0
        assert town.total_money() == pytest.approx(total_before, rel=1e-12)
        # the heir's wallet took the whole 4.0 estate
        assert float(np.sum(town.wallet)) == pytest.approx(
            wallet_sum_before + 0.8 - 0.0, rel=1e-12)
        heirs = set(town.firm_owner[list(owned_before)].tolist())
        assert len(heirs) == 1 and a not in heirs

    def test_orphans_rehomed_together(self):
        from epitown import epidemic
        from epitown.synth import build_town
        cfg = default_config().replace(population=3000,
                                       initial_infected_fraction=0.0)
        town = build_town(cfg, seed=8)
        rng = np.random.default_rng(4)
        # manufacture a household of one adult plus two small children
        hh = next(h for h, mm in enumerate(town.hh_members)
                  if sum(town.age_group[m] >= 4 and town.alive[m] for m in mm) >= 1)
        adult = next(m for m in town.hh_members[hh] if town.age_group[m] >= 4)
        small = [int(a) for a in np.nonzero(
            (town.profession == 0) & (town.band < 0)
            & (town.household_of != hh))[0][:2]]
        assert len(small) == 2
        for m in list(town.hh_members[hh]):
            if m != adult:
                town.hh_members[hh].remove(m)
                town.household_of[m] = -1
        for kid in small:
            old = town.household_of[kid]
            town.hh_members[old].remove(kid)
            town.hh_members[hh].append(kid)
            town.household_of[kid] = hh
            town.residence_loc[kid] = town.hh_loc[hh]
        town.alive[adult] = False
        town.d_state[adult] = epidemic.DEAD
        epidemic.resolve_death(town, adult, rng)
        new_homes = {int(town.household_of[k]) for k in small}
        assert hh not in new_homes
        assert len(new_homes) == 1  # both join one family
        for kid in small:
            assert town.chaperone[kid] >= 0
