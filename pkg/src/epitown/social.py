"""Work presence, leisure execution, isolation mechanics, care and shifts."""

from __future__ import annotations

import numpy as np

from . import _kernels, economy, epidemic
from .config import BLUE, CHILD, HEALTH, OWNER, PENSIONER, SERVICE, TEACHER, WHITE
from .synth import (COMMERCIAL, HOUSEHOLD, NONCOMMERCIAL, RETIREMENT, Town)

SHIFTS_PER_WORKER = 5


# ---------------------------------------------------------------------------
# shift schedules
# ---------------------------------------------------------------------------

def schedule_week(town: Town, avoid_monday_morning=None) -> None:
    """Assign next week's shifts: 5 per worker, one per day at most.

    Commercial facilities staff the nine peak shifts (weekday evenings and
    the whole weekend) at twice the weight of the five weekday off-peak
    shifts; hospitals spread staff over all 21 shifts.  A worker coming off a
    night shift never opens the next day (the ``avoid_monday_morning`` set
    carries that constraint across the week boundary).
    """
    town.shift_mask[:] = 0
    avoid = avoid_monday_morning or set()

    # commercial facilities: slots are (weekday, phase 1..2)
    slots_sw = [(d, p) for d in range(7) for p in (1, 2)]
    weights_sw = [2.0 if (d >= 5 or p == 2) else 1.0 for d, p in slots_sw]
    for f in town.commercial_firms:
        if not town.firm_active[f]:
            continue
        members = [a for a in town.firm_members[f] if town.alive[a]]
        _fill_shifts(town, members, slots_sw, weights_sw, avoid)

    # hospitals: all 21 slots
    slots_h = [(d, p) for d in range(7) for p in (1, 2, 3)]
    weights_h = [1.0] * len(slots_h)
    for hloc in town.hospital_locs:
        members = [int(a) for a in np.nonzero(
            town.alive & town.employed & (town.profession == HEALTH)
            & (town.workplace_loc == hloc))[0]]
        _fill_shifts(town, members, slots_h, weights_h, avoid)


def _fill_shifts(town: Town, members, slots, weights, avoid) -> None:
    if not members:
        return
    total = SHIFTS_PER_WORKER * len(members)
    wsum = sum(weights)
    target = [total * w / wsum for w in weights]
    staffed = [0] * len(slots)
    for a in members:
        taken_days = set()
        chosen = set()
        picks = 0
        while picks < SHIFTS_PER_WORKER:
            best, best_ratio = -1, None
            for s, (d, p) in enumerate(slots):
                if d in taken_days:
                    continue
                if p == 1 and (d - 1, 3) in chosen:
                    continue
                if p == 3 and (d + 1, 1) in chosen:
                    continue
                if p == 1 and d == 0 and a in avoid:
                    continue
                # relative load after taking this slot, so ties between empty
                # slots resolve toward the higher-weight (peak) ones
                ratio = (staffed[s] + 1) / target[s] if target[s] > 0 else 1e9
                if best_ratio is None or ratio < best_ratio:
                    best, best_ratio = s, ratio
            if best < 0:
                break
            d, p = slots[best]
            staffed[best] += 1
            taken_days.add(d)
            chosen.add((d, p))
            town.shift_mask[a] |= 1 << (d * 3 + (p - 1))
            picks += 1


def on_shift(town: Town, weekday: int, phase: int) -> np.ndarray:
    bit = 1 << (weekday * 3 + (phase - 1))
    return (town.shift_mask & bit) != 0


# ---------------------------------------------------------------------------
# work-day classification
# ---------------------------------------------------------------------------

def too_sick_to_work(town: Town) -> np.ndarray:
    s = town.d_state
    symptomatic = (s == epidemic.SYMPTOMATIC) | (s == epidemic.HOSPITAL) \
        | (s == epidemic.ICU) | (s == epidemic.POST_ICU)
    return town.unable & symptomatic


def classify_workday(town: Town, t: int, policy) -> np.ndarray:
    """Work status of employed weekday workers for phase 1 of a weekday."""
    st = np.zeros(town.n, dtype=np.int8)
    prof = town.profession
    employed = town.alive & town.employed
    weekday_workers = employed & np.isin(prof, (BLUE, WHITE, TEACHER))
    if not weekday_workers.any():
        return st
    sick = too_sick_to_work(town)
    isolated = town.isolated_until > t
    caregiver = town.is_caregiver if policy.schools_closed else np.zeros(town.n, bool)

    wc = weekday_workers & (prof == WHITE)
    bc = weekday_workers & (prof == BLUE)
    te = weekday_workers & (prof == TEACHER)

    st[weekday_workers] = economy.ON_SITE
    if policy.mandatory_telework:
        st[wc] = economy.TELEWORK
    if policy.schools_closed:
        st[te] = economy.CLOSED_PAID
        st[weekday_workers & caregiver & (prof == WHITE)] = economy.TELEWORK_CARE
        st[weekday_workers & caregiver & (prof != WHITE)] = economy.HOME_CARE
    st[wc & isolated] = economy.TELEWORK
    if policy.schools_closed:
        st[wc & isolated & caregiver] = economy.TELEWORK_CARE
    st[bc & isolated] = economy.HOME_ISOLATED
    st[te & isolated] = economy.HOME_ISOLATED
    st[weekday_workers & sick] = economy.HOME_SICK
    return st


def classify_shift(town: Town, scheduled: np.ndarray, t: int, policy) -> np.ndarray:
    """Work status of shift workers scheduled in the current phase."""
    st = np.zeros(town.n, dtype=np.int8)
    base = scheduled & town.alive & town.employed
    if not base.any():
        return st
    sick = too_sick_to_work(town)
    isolated = town.isolated_until > t
    caregiver = town.is_caregiver if policy.schools_closed else np.zeros(town.n, bool)

    st[base] = economy.ON_SITE
    if policy.leisure_closed:
        sw = base & (town.profession == SERVICE)
        st[sw] = economy.HOME_CLOSED
    if policy.schools_closed:
        st[base & caregiver] = economy.HOME_CARE
    st[base & isolated] = economy.HOME_ISOLATED
    st[base & sick] = economy.HOME_SICK
    return st


# ---------------------------------------------------------------------------
# leisure
# ---------------------------------------------------------------------------

def leisure_eligible(town: Town, weekday: int, phase: int, t: int,
                     working_now: np.ndarray, policy) -> np.ndarray:
    """Who builds a leisure plan this phase.

    One leisure phase on a work day, two on a day off; agents without a work
    schedule get both daily phases.  Hospital patients, isolated agents,
    agents too sick to work and night-shift workers resting in phase 1 all
    stay home instead.
    """
    if phase == 3:
        return np.zeros(town.n, dtype=bool)
    prof = town.profession
    elig = town.alive & (town.band >= 0) & ~working_now
    elig &= (town.d_state != epidemic.HOSPITAL) & (town.d_state != epidemic.ICU)
    elig &= ~(town.in_bed | town.in_icu)
    elig &= ~(town.isolated_until > t)
    elig &= ~too_sick_to_work(town)
    if phase == 1:
        elig &= ~town.worked_night

    is_weekday = weekday < 5
    shift_prof = np.isin(prof, (SERVICE, HEALTH)) & town.employed
    no_schedule = np.isin(prof, (PENSIONER, OWNER)) | \
        (np.isin(prof, (BLUE, WHITE, SERVICE, HEALTH, TEACHER)) & ~town.employed)

    allowed = np.zeros(town.n, dtype=bool)
    allowed |= no_schedule  # both phases, daily
    # weekday daily workers and children: evening phase only
    weekday_people = (np.isin(prof, (BLUE, WHITE, TEACHER)) & town.employed) | (prof == CHILD)
    if is_weekday:
        allowed |= weekday_people & (phase == 2)
    else:
        allowed |= weekday_people
    # shift workers: the off phase of a shift day, both phases of a day off
    if shift_prof.any():
        day_bits = (town.shift_mask >> (weekday * 3)) & 0b111
        has_shift_today = shift_prof & (day_bits != 0)
        shift_now_1 = shift_prof & ((day_bits & 0b001) != 0)
        shift_now_2 = shift_prof & ((day_bits & 0b010) != 0)
        night_shift = shift_prof & ((day_bits & 0b100) != 0)
        allowed |= shift_prof & ~has_shift_today
        if phase == 1:
            allowed |= shift_now_2  # evening shift: morning leisure
        else:
            allowed |= shift_now_1 | night_shift
    return elig & allowed


def run_leisure_phase(town: Town, t: int, weekday: int, phase: int,
                      elig: np.ndarray, loc_now: np.ndarray, policy) -> int:
    """Plan and execute leisure for all eligible agents; returns thwarts."""
    order = np.nonzero(elig)[0].astype(np.int64)
    if order.size == 0:
        return 0
    lp = town.cfg.leisure
    m = order.size
    plan_type = np.empty((m, lp.plan_length), dtype=np.int8)
    plan_target = np.empty((m, lp.plan_length), dtype=np.int64)
    plan_n = np.empty(m, dtype=np.int32)
    _kernels.build_plans(
        order, lp.plan_length, lp.plan_draw_cap,
        town.f_off, town.f_idx, town.f_w, town.alive,
        town.nc_off, town.nc_idx, town.nc_u, town.nc_edge_active,
        town.c_off, town.c_idx, town.c_u, town.c_edge_active,
        town.home_mean, policy.home_multiplier,
        plan_type, plan_target, plan_n)

    idx_of = np.full(town.n, -1, dtype=np.int64)
    idx_of[order] = np.arange(m)
    meetable = elig.copy()
    engaged = np.zeros(town.n, dtype=bool)

    n_c = len(town.c_loc)
    c_firm = town.commercial_firms.astype(np.int64)
    c_closed = town.loc_closed[town.c_loc] | np.asarray([policy.leisure_closed] * n_c)
    c_price = town.firm_price[c_firm]
    # guest slots left at maximum capacity (staff do not consume guest slots)
    c_slots = town.loc_theta_max[town.c_loc].astype(np.int64)
    nc_closed = town.loc_closed[town.nc_loc]
    nc_slots = town.loc_theta_max[town.nc_loc].astype(np.int64)

    thwarts = _kernels.match_leisure(
        order, idx_of, plan_type, plan_target, plan_n,
        town.residence_loc.astype(np.int64), loc_now,
        meetable, engaged,
        town.c_loc.astype(np.int64), c_firm, c_closed, c_slots, c_price,
        town.nc_loc.astype(np.int64), nc_closed, nc_slots,
        town.m_l, town.cfg.economy.leisure_splash_fraction,
        policy.contact_ban,
        town.firm_funds, town.week_sales, town.week_guests,
        town.thwart_causes)
    return int(thwarts)


def place_small_children(town: Town, loc_now: np.ndarray, t: int) -> None:
    """Under-10 children tag along with their household chaperone."""
    kids = np.nonzero(town.alive & (town.profession == CHILD) & (town.band < 0))[0]
    for a in kids:
        if loc_now[a] != town.residence_loc[a]:
            continue  # already placed (school / hospital)
        if town.isolated_until[a] > t or town.unable[a] and \
                town.d_state[a] == epidemic.SYMPTOMATIC:
            continue
        ch = town.chaperone[a]
        if ch < 0 or not town.alive[ch]:
            continue
        dest = loc_now[ch]
        if dest >= 0 and town.loc_kind[dest] in (HOUSEHOLD, RETIREMENT,
                                                 COMMERCIAL, NONCOMMERCIAL):
            loc_now[a] = dest


# ---------------------------------------------------------------------------
# isolation and care
# ---------------------------------------------------------------------------

def apply_isolation(town: Town, agents, until: int) -> None:
    """Extend isolation windows; overlapping windows keep the later end."""
    for a in agents:
        if town.isolated_until[a] < until:
            town.isolated_until[a] = until


def on_detected_symptoms(town: Town, a: int, t: int, policy) -> None:
    """Trigger isolation measures at symptom onset of a detected case."""
    if policy is None:
        return
    from .policy import ISOLATION_PERIODS
    if policy.case_isolation:
        apply_isolation(town, [a], int(town.t_final[a]))
    if policy.family_isolation:
        hh = town.household_of[a]
        if hh >= 0:
            members = [m for m in town.hh_members[hh] if m != a and town.alive[m]]
            apply_isolation(town, members, t + ISOLATION_PERIODS)
    if policy.workplace_isolation and town.profession[a] in (BLUE, WHITE, SERVICE):
        f = town.workplace_firm[a]
        if f >= 0:
            mates = [m for m in town.firm_members[f] if m != a and town.alive[m]]
            apply_isolation(town, mates, t + ISOLATION_PERIODS)


def select_caregiver(town: Town, hh: int) -> int | None:
    """Pick one caregiver for a household with children under 10.

    Priority: an adult without work obligations (pensioner, unemployed, firm
    owner), then a white-collar worker who can telework, then any other
    worker.  Returns the chosen agent id or None.
    """
    best, best_rank = None, 99
    for m in town.hh_members[hh]:
        if not town.alive[m] or town.age_group[m] < 4:
            continue
        if town.in_bed[m] or town.in_icu[m]:
            continue
        p = town.profession[m]
        if p in (PENSIONER, OWNER) or not town.employed[m]:
            rank = 0
        elif p == WHITE:
            rank = 1
        else:
            rank = 2
        if rank < best_rank:
            best, best_rank = m, rank
    if best is not None:
        town.caregiver_of[hh] = int(best)
    return best


def households_needing_care(town: Town):
    out = set()
    kids = np.nonzero(town.alive & (town.profession == CHILD) & (town.band < 0))[0]
    for a in kids:
        hh = town.household_of[a]
        if hh >= 0:
            out.add(int(hh))
    return out


def refresh_caregivers(town: Town, schools_closed: bool) -> None:
    """Keep caregiver picks sticky but valid; used at day boundaries."""
    if not schools_closed:
        town.caregiver_of.clear()
        town.is_caregiver[:] = False
        return
    needed = households_needing_care(town)
    for hh in list(town.caregiver_of):
        if hh not in needed:
            del town.caregiver_of[hh]
    for hh in needed:
        cur = town.caregiver_of.get(hh)
        if cur is None or not town.alive[cur] or town.in_bed[cur] or town.in_icu[cur]:
            select_caregiver(town, hh)
    town.is_caregiver[:] = False
    for a in town.caregiver_of.values():
        town.is_caregiver[a] = True
