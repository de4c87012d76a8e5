"""Disease state machine: severity-driven courses, timelines, hospital and
ICU capacity, deaths and inheritance.

Every infection draws a severity level sigma ~ U[0, 1).  Age-dependent
thresholds on sigma fix the clinical course at infection time:

* mild                      sigma <  1 - pH
* severe, survives          1 - pH <= sigma < severe-death threshold
* severe, dies              severe-death threshold <= sigma < 1 - pH*pC
* critical, survives        1 - pH*pC <= sigma < 1 - 0.5*pH*pC
* critical, dies            sigma >= 1 - 0.5*pH*pC

where pH is the hospitalization probability, pC the critical-care share of
hospitalized cases, and the severe-death threshold equals
``1 - pH*pC - pH*(1-pC)*pD`` with pD the ward death rate.  All comparisons
use >= at the threshold.  Durations are anchored at infection (latent,
incubation) and at symptom onset (everything else).
"""

from __future__ import annotations

import numpy as np

from .config import MedicalParams, TownConfig

# disease states
SUSCEPTIBLE = 0
EXPOSED = 1
INFECTIOUS_PRESYMPT = 2
SYMPTOMATIC = 3
HOSPITAL = 4
ICU = 5
POST_ICU = 6
RECOVERED = 7
DEAD = 8

# courses
COURSE_NONE = 0
MILD = 1
SEVERE_SURVIVE = 2
SEVERE_DIE = 3
CRITICAL_SURVIVE = 4
CRITICAL_DIE = 5

NEVER = np.int32(2**31 - 1)

# home outcomes for severe cases that found no free bed
HOME_NONE = 0
HOME_RECOVER = 1
HOME_DIE = 2


def course_thresholds(med: MedicalParams) -> dict[str, np.ndarray]:
    """Per-age-group sigma thresholds (arrays of length 17)."""
    ph = np.asarray(med.p_hospitalized)
    pc = np.asarray(med.p_critical)
    pd_ = np.asarray(med.p_ward_death)
    return {
        "hosp": 1.0 - ph,
        "crit": 1.0 - ph * pc,
        "crit_die": 1.0 - 0.5 * ph * pc,
        "sev_die": 1.0 - ph * pc - ph * (1.0 - pc) * pd_,
    }


def assign_course(sigma: float, age_group: int, med: MedicalParams) -> int:
    """Clinical course implied by a severity draw for one age group."""
    thr = course_thresholds(med)
    if sigma < thr["hosp"][age_group]:
        return MILD
    if sigma >= thr["crit"][age_group]:
        return CRITICAL_DIE if sigma >= thr["crit_die"][age_group] else CRITICAL_SURVIVE
    return SEVERE_DIE if sigma >= thr["sev_die"][age_group] else SEVERE_SURVIVE


def course_duration(course: int, med: MedicalParams) -> int:
    """Periods from symptom onset to the end of the infection."""
    return {
        MILD: med.mild_duration,
        SEVERE_SURVIVE: med.severe_survive_duration,
        SEVERE_DIE: med.severe_death_duration,
        CRITICAL_SURVIVE: med.critical_survive_duration,
        CRITICAL_DIE: med.critical_death_duration,
    }[course]


def schedule_timeline(course: int, t_infected: int, med: MedicalParams) -> dict[str, int]:
    """Milestone periods for one infection."""
    t_inf = t_infected + med.latent_periods
    t_sym = t_infected + med.incubation_periods
    out = {"infectious": t_inf, "symptoms": t_sym,
           "final": t_sym + course_duration(course, med)}
    if course != MILD:
        out["admission"] = t_sym + med.admission_delay
    if course == CRITICAL_SURVIVE:
        out["icu_exit"] = out["final"] - med.post_icu_ward_periods
    return out


def severe_no_bed_death_threshold(age_group: int, med: MedicalParams) -> float:
    """Severity above which an unhospitalized severe case dies.

    Deaths hit the configured fraction of the severe band counted from the
    top, mirroring how in-hospital severe deaths are selected.
    """
    ph = med.p_hospitalized[age_group]
    pc = med.p_critical[age_group]
    band = ph * (1.0 - pc)
    return (1.0 - ph * pc) - med.p_die_severe_without_bed * band


def infection_probability(kind_is_leisure: bool, occupancy: int,
                          theta_std: float, beta: float, hygiene: float) -> float:
    """Per-contact transmission probability at one location."""
    x = occupancy / theta_std if kind_is_leisure else 1.0
    return min(1.0, beta * x * hygiene)


def expose(town, agent: int, t: int, sigma: float) -> None:
    """Set one agent to Exposed with a drawn severity; schedules the course."""
    cfg: TownConfig = town.cfg
    med = cfg.medical
    g = int(town.age_group[agent])
    crs = assign_course(sigma, g, med)
    tl = schedule_timeline(crs, t, med)
    town.d_state[agent] = EXPOSED
    town.severity[agent] = sigma
    town.course[agent] = crs
    town.detected[agent] = sigma >= cfg.epidemic.detection_threshold
    town.unable[agent] = sigma >= cfg.epidemic.unable_to_work_threshold
    town.t_infected[agent] = t
    town.t_sympt[agent] = tl["symptoms"]
    town.t_next[agent] = tl["infectious"]
    town.t_final[agent] = tl["final"]


def is_infectious_state(state: int) -> bool:
    return INFECTIOUS_PRESYMPT <= state <= POST_ICU


def progress_and_hospitalize(town, t: int, policy, events_rng, metrics=None):
    """Fire all disease transitions due at period ``t``.

    Admission takes capacity first come, first served (ties broken by agent
    id): critical cases need an ICU or die on the spot; severe cases without
    a free bed stay home and die only if their severity falls in the
    configured top fraction of the severe band.
    """
    due = np.nonzero(town.t_next == t)[0]
    if due.size == 0:
        return
    med = town.cfg.medical
    for a in due:
        state = town.d_state[a]
        crs = town.course[a]
        if state == EXPOSED:
            town.d_state[a] = INFECTIOUS_PRESYMPT
            town.t_next[a] = town.t_sympt[a]
        elif state == INFECTIOUS_PRESYMPT:
            town.d_state[a] = SYMPTOMATIC
            if crs == MILD:
                town.t_next[a] = town.t_final[a]
            else:
                town.t_next[a] = town.t_sympt[a] + med.admission_delay
            if town.detected[a]:
                from . import social
                social.on_detected_symptoms(town, a, t, policy)
        elif state == SYMPTOMATIC:
            if crs == MILD:
                _recover(town, a)
            elif town.home_outcome[a] == HOME_RECOVER and t == town.t_final[a]:
                _recover(town, a)
            elif town.home_outcome[a] == HOME_DIE and t == town.t_final[a]:
                _die(town, a, t, events_rng, metrics)
            else:
                _admit(town, a, t, events_rng, metrics)
        elif state == HOSPITAL:
            if crs == SEVERE_SURVIVE:
                town.beds_used -= 1
                town.in_bed[a] = False
                _recover(town, a)
            else:
                _die(town, a, t, events_rng, metrics)
        elif state == ICU:
            if crs == CRITICAL_SURVIVE:
                town.icu_used -= 1
                town.in_icu[a] = False
                # ward recovery stay, capacity permitting
                if town.beds_used < town.beds_total:
                    town.beds_used += 1
                    town.in_bed[a] = True
                    town.d_state[a] = POST_ICU
                else:
                    town.hospital_of[a] = -1
                    town.d_state[a] = POST_ICU
                town.t_next[a] = town.t_final[a]
            else:
                _die(town, a, t, events_rng, metrics)
        elif state == POST_ICU:
            if town.in_bed[a]:
                town.beds_used -= 1
                town.in_bed[a] = False
            town.hospital_of[a] = -1
            _recover(town, a)
        # recovered/dead have t_next == NEVER


def _admit(town, a: int, t: int, events_rng, metrics):
    med = town.cfg.medical
    crs = town.course[a]
    if crs in (CRITICAL_SURVIVE, CRITICAL_DIE):
        if town.icu_used < town.icu_total:
            town.icu_used += 1
            town.in_icu[a] = True
            town.d_state[a] = ICU
            town.hospital_of[a] = _pick_hospital(town)
            if crs == CRITICAL_SURVIVE:
                town.t_next[a] = town.t_final[a] - med.post_icu_ward_periods
            else:
                town.t_next[a] = town.t_final[a]
        else:
            _die(town, a, t, events_rng, metrics)
    else:
        if town.beds_used < town.beds_total:
            town.beds_used += 1
            town.in_bed[a] = True
            town.d_state[a] = HOSPITAL
            town.hospital_of[a] = _pick_hospital(town)
            town.t_next[a] = town.t_final[a]
        else:
            # no bed: stays symptomatic at home, outcome fixed by severity
            g = int(town.age_group[a])
            if town.severity[a] >= severe_no_bed_death_threshold(g, med):
                town.home_outcome[a] = HOME_DIE
                town.t_final[a] = town.t_sympt[a] + med.severe_death_duration
            else:
                town.home_outcome[a] = HOME_RECOVER
                town.t_final[a] = town.t_sympt[a] + med.severe_survive_duration
            town.t_next[a] = town.t_final[a]


def _pick_hospital(town) -> int:
    """Least-loaded hospital (deterministic tie-break by index)."""
    if len(town.hospital_locs) == 1:
        h = town.hospital_locs[0]
        town.hospital_patients[h] += 1
        return h
    best, best_load = -1, None
    for h in town.hospital_locs:
        load = town.hospital_patients[h]
        if best_load is None or load < best_load:
            best, best_load = h, load
    town.hospital_patients[best] += 1
    return best


def _release_hospital(town, a: int) -> None:
    h = town.hospital_of[a]
    if h >= 0:
        town.hospital_patients[h] -= 1
    town.hospital_of[a] = -1


def _recover(town, a: int) -> None:
    _release_hospital(town, a)
    town.d_state[a] = RECOVERED
    town.t_next[a] = NEVER
    town.unable[a] = False


def _die(town, a: int, t: int, events_rng, metrics) -> None:
    if town.in_icu[a]:
        town.icu_used -= 1
        town.in_icu[a] = False
    if town.in_bed[a]:
        town.beds_used -= 1
        town.in_bed[a] = False
    _release_hospital(town, a)
    town.d_state[a] = DEAD
    town.t_next[a] = NEVER
    town.alive[a] = False
    if metrics is not None:
        metrics.on_death(t)
    resolve_death(town, a, events_rng)


def resolve_death(town, a: int, events_rng) -> None:
    """Inheritance, guardianship and roster cleanup for a dead agent.

    A uniformly drawn living adult (20+) inherits all funds and any owned
    firms; with no adult left, funds escheat to the government.  Children
    left without any household member aged 10+ move together to a random
    family that still has an adult.
    """
    # funds
    estate = town.wallet[a] + town.m_l[a]
    town.wallet[a] = 0.0
    town.m_l[a] = 0.0
    town.goods_budget[a] = 0.0
    heir = -1
    adults = np.nonzero(town.alive & (town.age_group >= 4))[0]
    if adults.size:
        heir = int(adults[events_rng.integers(adults.size)])
        town.wallet[heir] += estate
    else:
        town.gov.savings += estate
        town.gov.escheated += estate
    # firms
    owned = np.nonzero(town.firm_owner == a)[0]
    for f in owned:
        town.firm_owner[f] = heir if heir >= 0 else -1
    # employment
    if town.employed[a]:
        town.employed[a] = False
        f = town.workplace_firm[a]
        if f >= 0:
            members = town.firm_members[f]
            if a in members:
                members.remove(a)
        town.workplace_firm[a] = -1
    else:
        prof = int(town.profession[a])
        pool = town.unemployed_pool.get(prof)
        if pool and a in pool:
            pool.remove(a)
    # friendship sums handled lazily (plans skip dead friends)
    # household
    hh = town.household_of[a]
    if hh >= 0:
        members = town.hh_members[hh]
        if a in members:
            members.remove(a)
        alive_members = [m for m in members if town.alive[m]]
        minders = [m for m in alive_members if town.age_group[m] >= 2]
        kids = [m for m in alive_members if town.profession[m] == 0]
        if kids and not minders:
            _rehome_children(town, kids, events_rng)
        else:
            for m in alive_members:
                if town.chaperone[m] == a:
                    _assign_chaperone(town, m)
            if town.caregiver_of.get(hh) == a:
                del town.caregiver_of[hh]
                from . import social
                if town.policy_state is not None and town.policy_state.schools_closed:
                    social.select_caregiver(town, hh)


def _rehome_children(town, kids, events_rng) -> None:
    candidates = town.family_households
    # require a living adult in the destination
    for _ in range(64):
        hh = candidates[events_rng.integers(len(candidates))]
        if any(town.alive[m] and town.age_group[m] >= 4 for m in town.hh_members[hh]):
            break
    else:
        return  # no viable family found; children stay put
    for kid in kids:
        old = town.household_of[kid]
        if old >= 0 and kid in town.hh_members[old]:
            town.hh_members[old].remove(kid)
        town.hh_members[hh].append(kid)
        town.household_of[kid] = hh
        town.residence_loc[kid] = town.hh_loc[hh]
        _assign_chaperone(town, kid)
    if town.policy_state is not None and town.policy_state.schools_closed:
        from . import social
        social.select_caregiver(town, hh)


def _assign_chaperone(town, kid: int) -> None:
    if town.age_group[kid] >= 2:
        town.chaperone[kid] = -1
        return
    hh = town.household_of[kid]
    best = -1
    best_rank = 99
    for m in town.hh_members[hh]:
        if m == kid or not town.alive[m] or town.age_group[m] < 2:
            continue
        # prefer non-working adults, then any adult, then a 10+ sibling
        if town.age_group[m] >= 4 and not town.employed[m]:
            rank = 0
        elif town.age_group[m] >= 4:
            rank = 1
        else:
            rank = 2
        if rank < best_rank:
            best, best_rank = m, rank
    town.chaperone[kid] = best
