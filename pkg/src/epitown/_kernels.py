"""Numba kernels for the per-phase hot loops.

Two loops dominate the runtime at full town size: leisure planning/matching
and contact transmission.  Both run single-threaded per simulation run (Monte
Carlo parallelism happens across processes) and draw all randomness from
numba's internal RNG, seeded once per run via :func:`seed_kernels`, so a run
is bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# plan entry types
ENTRY_FRIEND = 0
ENTRY_NC = 1
ENTRY_C = 2
ENTRY_HOME = 3

# location kinds (mirrors synth.py)
K_HOUSEHOLD = 0
K_RETIREMENT = 1
K_FACTORY = 2
K_OFFICE = 3
K_SCHOOL = 4
K_HOSPITAL = 5
K_COMMERCIAL = 6
K_NONCOMMERCIAL = 7

# disease states (mirrors epidemic.py)
S_SUSCEPTIBLE = 0
S_EXPOSED = 1

C_MILD = 1
C_SEV_SURV = 2
C_SEV_DIE = 3
C_CRIT_SURV = 4
C_CRIT_DIE = 5


@njit(cache=True)
def seed_kernels(seed):
    np.random.seed(seed)


@njit(cache=True)
def _draw_entry(a, used_type, used_k, n_used, home_used,
                f_off, f_idx, f_w, alive,
                nc_off, nc_u, nc_open,
                c_off, c_u, c_open,
                home_draw):
    """One ladder draw over friends -> nc -> c -> home for agent ``a``.

    Returns (entry_type, k) where k indexes into the agent's edge slice, or
    (-1, -1) when the drawn entry is already in the plan.
    """
    tot_f = 0.0
    for k in range(f_off[a], f_off[a + 1]):
        if alive[f_idx[k]]:
            tot_f += f_w[k]
    tot_nc = 0.0
    for k in range(nc_off[a], nc_off[a + 1]):
        if nc_open[k]:
            tot_nc += nc_u[k]
    tot_c = 0.0
    for k in range(c_off[a], c_off[a + 1]):
        if c_open[k]:
            tot_c += c_u[k]
    f_total = tot_f + tot_nc + tot_c + home_draw
    if f_total <= 0.0:
        return ENTRY_HOME, -1
    u = np.random.random() * f_total
    if u < tot_f:
        acc = 0.0
        for k in range(f_off[a], f_off[a + 1]):
            if not alive[f_idx[k]]:
                continue
            acc += f_w[k]
            if u < acc:
                for j in range(n_used):
                    if used_type[j] == ENTRY_FRIEND and used_k[j] == k:
                        return -1, -1
                return ENTRY_FRIEND, k
        return -1, -1
    u -= tot_f
    if u < tot_nc:
        acc = 0.0
        for k in range(nc_off[a], nc_off[a + 1]):
            if not nc_open[k]:
                continue
            acc += nc_u[k]
            if u < acc:
                for j in range(n_used):
                    if used_type[j] == ENTRY_NC and used_k[j] == k:
                        return -1, -1
                return ENTRY_NC, k
        return -1, -1
    u -= tot_nc
    if u < tot_c:
        acc = 0.0
        for k in range(c_off[a], c_off[a + 1]):
            if not c_open[k]:
                continue
            acc += c_u[k]
            if u < acc:
                for j in range(n_used):
                    if used_type[j] == ENTRY_C and used_k[j] == k:
                        return -1, -1
                return ENTRY_C, k
        return -1, -1
    if home_used:
        return -1, -1
    return ENTRY_HOME, -1


@njit(cache=True)
def build_plans(order, plan_len, draw_cap,
                f_off, f_idx, f_w, alive,
                nc_off, nc_idx, nc_u, nc_edge_active,
                c_off, c_idx, c_u, c_edge_active,
                home_mean, home_mult,
                plan_type, plan_target, plan_n):
    """Build leisure plans for the agents in ``order`` (ascending ids).

    Entries are drawn sequentially from the cumulative preference ladder with
    a fresh uniform draw each time; duplicates are redrawn up to ``draw_cap``
    total draws.  Dead friends and permanently closed facilities carry zero
    weight.  ``plan_target`` holds the friend agent id or the facility index;
    -1 marks the stay-home entry.
    """
    m = order.shape[0]
    used_type = np.empty(plan_len, dtype=np.int8)
    used_k = np.empty(plan_len, dtype=np.int64)
    # per-edge openness buffers
    for i in range(m):
        a = order[i]
        hd = np.random.normal(home_mean[a], 0.1 * home_mean[a]) * home_mult
        if hd < 0.0:
            hd = 0.0
        n_used = 0
        home_used = False
        draws = 0
        nent = 0
        while nent < plan_len and draws < draw_cap:
            draws += 1
            typ, k = _draw_entry(a, used_type, used_k, n_used, home_used,
                                 f_off, f_idx, f_w, alive,
                                 nc_off, nc_u, nc_edge_active,
                                 c_off, c_u, c_edge_active, hd)
            if typ < 0:
                continue
            if typ == ENTRY_HOME:
                plan_type[i, nent] = ENTRY_HOME
                plan_target[i, nent] = -1
                home_used = True
            elif typ == ENTRY_FRIEND:
                plan_type[i, nent] = ENTRY_FRIEND
                plan_target[i, nent] = f_idx[k]
                used_type[n_used] = ENTRY_FRIEND
                used_k[n_used] = k
                n_used += 1
            elif typ == ENTRY_NC:
                plan_type[i, nent] = ENTRY_NC
                plan_target[i, nent] = nc_idx[k]
                used_type[n_used] = ENTRY_NC
                used_k[n_used] = k
                n_used += 1
            else:
                plan_type[i, nent] = ENTRY_C
                plan_target[i, nent] = c_idx[k]
                used_type[n_used] = ENTRY_C
                used_k[n_used] = k
                n_used += 1
            nent += 1
        if nent == 0:
            plan_type[i, 0] = ENTRY_HOME
            plan_target[i, 0] = -1
            nent = 1
        plan_n[i] = nent


@njit(cache=True)
def match_leisure(order, idx_of, plan_type, plan_target, plan_n,
                  resident_loc, loc_out,
                  meetable, engaged,
                  c_loc, c_firm, c_closed, c_slots, c_price,
                  nc_loc, nc_closed, nc_slots,
                  m_l, omega, contact_ban,
                  firm_funds, firm_sales, firm_guests, thwart_causes):
    """Alternating-round plan execution.

    Facility and stay-home entries execute first; friend meetings run after,
    joining the friend's resolved location (the friend's household when the
    friend stays home, with commercial entry conditions re-checked when the
    friend sits in a paid facility).  Failed entries count one thwart each;
    ``thwart_causes`` accumulates per reason (0 closed, 1 capacity,
    2 unaffordable, 3 friend unavailable).  Returns the total.
    """
    m = order.shape[0]
    ptr = np.zeros(m, dtype=np.int32)
    resolved = np.zeros(m, dtype=np.bool_)
    # resolved facility bookkeeping: 0 none/home, 1 nc, 2 c
    res_kind = np.zeros(m, dtype=np.int8)
    res_fac = np.full(m, -1, dtype=np.int64)
    thwarts = 0
    active = m
    max_rounds = 8 * (plan_type.shape[1] + 2)
    for _round in range(max_rounds):
        if active == 0:
            break
        progress = False
        # pass A: facilities and home
        for i in range(m):
            if resolved[i]:
                continue
            a = order[i]
            while ptr[i] < plan_n[i]:
                typ = plan_type[i, ptr[i]]
                if typ == ENTRY_FRIEND:
                    break
                if typ == ENTRY_HOME:
                    loc_out[a] = resident_loc[a]
                    resolved[i] = True
                    active -= 1
                    progress = True
                    break
                if typ == ENTRY_NC:
                    fac = plan_target[i, ptr[i]]
                    if nc_closed[fac] or nc_slots[fac] <= 0:
                        thwarts += 1
                        thwart_causes[0 if nc_closed[fac] else 1] += 1
                        ptr[i] += 1
                        progress = True
                        continue
                    nc_slots[fac] -= 1
                    loc_out[a] = nc_loc[fac]
                    res_kind[i] = 1
                    res_fac[i] = fac
                    resolved[i] = True
                    active -= 1
                    progress = True
                    break
                # commercial
                fac = plan_target[i, ptr[i]]
                if c_closed[fac] or c_slots[fac] <= 0 or m_l[a] < c_price[fac]:
                    thwarts += 1
                    if c_closed[fac]:
                        thwart_causes[0] += 1
                    elif c_slots[fac] <= 0:
                        thwart_causes[1] += 1
                    else:
                        thwart_causes[2] += 1
                    ptr[i] += 1
                    progress = True
                    continue
                spend = c_price[fac] + omega * (m_l[a] - c_price[fac])
                m_l[a] -= spend
                fm = c_firm[fac]
                firm_funds[fm] += spend
                firm_sales[fm] += spend
                firm_guests[fm] += 1.0
                c_slots[fac] -= 1
                loc_out[a] = c_loc[fac]
                res_kind[i] = 2
                res_fac[i] = fac
                resolved[i] = True
                active -= 1
                progress = True
                break
            if not resolved[i] and ptr[i] >= plan_n[i]:
                loc_out[a] = resident_loc[a]
                resolved[i] = True
                active -= 1
                progress = True
        # pass B: friend meetings
        for i in range(m):
            if resolved[i]:
                continue
            a = order[i]
            j = plan_target[i, ptr[i]]
            if contact_ban or not meetable[j] or engaged[j]:
                thwarts += 1
                thwart_causes[3] += 1
                ptr[i] += 1
                progress = True
                continue
            jj = idx_of[j]
            if jj >= 0 and resolved[jj]:
                if res_kind[jj] == 0:
                    # friend is at home: visit there
                    loc_out[a] = resident_loc[j]
                    engaged[j] = True
                    engaged[a] = True
                    resolved[i] = True
                    active -= 1
                elif res_kind[jj] == 1:
                    fac = res_fac[jj]
                    if nc_slots[fac] <= 0:
                        thwarts += 1
                        thwart_causes[1] += 1
                        ptr[i] += 1
                    else:
                        nc_slots[fac] -= 1
                        loc_out[a] = nc_loc[fac]
                        engaged[j] = True
                        engaged[a] = True
                        resolved[i] = True
                        active -= 1
                else:
                    fac = res_fac[jj]
                    if c_slots[fac] <= 0 or m_l[a] < c_price[fac]:
                        thwarts += 1
                        thwart_causes[1 if c_slots[fac] <= 0 else 2] += 1
                        ptr[i] += 1
                    else:
                        spend = c_price[fac] + omega * (m_l[a] - c_price[fac])
                        m_l[a] -= spend
                        fm = c_firm[fac]
                        firm_funds[fm] += spend
                        firm_sales[fm] += spend
                        firm_guests[fm] += 1.0
                        c_slots[fac] -= 1
                        loc_out[a] = c_loc[fac]
                        engaged[j] = True
                        engaged[a] = True
                        resolved[i] = True
                        active -= 1
                progress = True
            elif jj >= 0 and not resolved[jj]:
                if ptr[jj] < plan_n[jj] and \
                        plan_type[jj, ptr[jj]] == ENTRY_FRIEND and \
                        plan_target[jj, ptr[jj]] == a:
                    # mutual plan: meet at the asked friend's household
                    loc_out[a] = resident_loc[j]
                    loc_out[j] = resident_loc[j]
                    engaged[a] = True
                    engaged[j] = True
                    resolved[i] = True
                    resolved[jj] = True
                    active -= 2
                    progress = True
                # else: friend still deciding, retry next round
            else:
                # friend is meetable but not planning this phase (should not
                # happen; treat as unavailable)
                thwarts += 1
                thwart_causes[3] += 1
                ptr[i] += 1
                progress = True
        if not progress:
            # cycle of friend-waiters: fail the first one to break it
            for i in range(m):
                if not resolved[i]:
                    thwarts += 1
                    thwart_causes[3] += 1
                    ptr[i] += 1
                    break
    # safety net: anything left stays home
    for i in range(m):
        if not resolved[i]:
            loc_out[order[i]] = resident_loc[order[i]]
    return thwarts


@njit(cache=True)
def transmit(t, occ_off, occ_ids, loc_kind, loc_theta_std, loc_of,
             infectious_ids, d_state,
             beta, gamma_eff, hygiene_by_kind,
             is_school_child, class_of, cls_off, cls_ids, max_occupancy,
             # course tables (per age group)
             age_group, thr_hosp, thr_crit, thr_crit_die, thr_sev_die,
             detection_threshold, unable_threshold,
             latent, incubation, mild_dur, sev_surv_dur, sev_die_dur,
             crit_surv_dur, crit_die_dur,
             # disease arrays written on exposure
             severity, course, detected, unable, t_infected, t_sympt,
             t_next, t_final,
             out_src, out_tgt, out_kind, kind_counts):
    """Per-contact transmission at every occupied location.

    For every infectious agent, ``gamma_eff`` co-located contacts are drawn
    without replacement (children at school contact ``gamma_eff - 1``
    classmates plus one random person in the school).  Each susceptible
    contact converts independently with probability
    ``beta * crowding * hygiene``; crowding is occupancy over standard
    capacity at leisure facilities and 1 elsewhere.  New exposures get their
    severity drawn and full course timeline scheduled in place.

    Returns the number of new exposures.
    """
    n_new = 0
    buf = np.empty(max_occupancy + 1, dtype=np.int64)
    for ii in range(infectious_ids.shape[0]):
        src = infectious_ids[ii]
        loc = loc_of[src]
        if loc < 0:
            continue
        kind = loc_kind[loc]
        occ_lo = occ_off[loc]
        occ_hi = occ_off[loc + 1]
        n_here = occ_hi - occ_lo
        if n_here <= 1:
            continue
        x = 1.0
        if kind == K_COMMERCIAL or kind == K_NONCOMMERCIAL:
            x = n_here / loc_theta_std[loc]
        p = beta * x * hygiene_by_kind[kind]
        if p > 1.0:
            p = 1.0
        if p <= 0.0:
            continue

        # assemble the contact set
        n_contacts = 0
        if is_school_child[src] and kind == K_SCHOOL:
            cls = class_of[src]
            lo = cls_off[cls]
            hi = cls_off[cls + 1]
            n_cls = hi - lo
            # up to gamma-1 classmates (excluding self)
            avail = n_cls - 1
            want = gamma_eff - 1
            if want > avail:
                want = avail
            if want > 0:
                # partial Fisher-Yates over classmate slice indices
                tmp = buf[:n_cls]
                for q in range(n_cls):
                    tmp[q] = cls_ids[lo + q]
                # move self out of the way
                for q in range(n_cls):
                    if tmp[q] == src:
                        tmp[q] = tmp[n_cls - 1]
                        break
                for q in range(want):
                    r = q + np.random.randint(0, n_cls - 1 - q)
                    tmp[q], tmp[r] = tmp[r], tmp[q]
                n_contacts = want
            # plus one random person present at the school
            extra = occ_ids[occ_lo + np.random.randint(0, n_here)]
            tries = 0
            while extra == src and tries < 8:
                extra = occ_ids[occ_lo + np.random.randint(0, n_here)]
                tries += 1
            if extra != src:
                buf[n_contacts] = extra
                n_contacts += 1
        else:
            avail = n_here - 1
            want = gamma_eff
            if want > avail:
                want = avail
            tmp = buf[:n_here]
            for q in range(n_here):
                tmp[q] = occ_ids[occ_lo + q]
            # remove self
            self_q = -1
            for q in range(n_here):
                if tmp[q] == src:
                    self_q = q
                    break
            tmp[self_q] = tmp[n_here - 1]
            for q in range(want):
                r = q + np.random.randint(0, n_here - 1 - q)
                tmp[q], tmp[r] = tmp[r], tmp[q]
            n_contacts = want

        for q in range(n_contacts):
            tgt = buf[q]
            if d_state[tgt] != S_SUSCEPTIBLE:
                continue
            if np.random.random() >= p:
                continue
            # expose
            sigma = np.random.random()
            g = age_group[tgt]
            if sigma < thr_hosp[g]:
                crs = C_MILD
            elif sigma >= thr_crit[g]:
                crs = C_CRIT_DIE if sigma >= thr_crit_die[g] else C_CRIT_SURV
            else:
                crs = C_SEV_DIE if sigma >= thr_sev_die[g] else C_SEV_SURV
            d_state[tgt] = S_EXPOSED
            severity[tgt] = sigma
            course[tgt] = crs
            detected[tgt] = sigma >= detection_threshold
            unable[tgt] = sigma >= unable_threshold
            t_infected[tgt] = t
            ts = t + incubation
            t_sympt[tgt] = ts
            t_next[tgt] = t + latent
            if crs == C_MILD:
                t_final[tgt] = ts + mild_dur
            elif crs == C_SEV_SURV:
                t_final[tgt] = ts + sev_surv_dur
            elif crs == C_SEV_DIE:
                t_final[tgt] = ts + sev_die_dur
            elif crs == C_CRIT_SURV:
                t_final[tgt] = ts + crit_surv_dur
            else:
                t_final[tgt] = ts + crit_die_dur
            out_src[n_new] = src
            out_tgt[n_new] = tgt
            out_kind[n_new] = kind
            kind_counts[kind] += 1
            n_new += 1
    return n_new


@njit(cache=True)
def uniform_draws(k):
    out = np.empty(k)
    for i in range(k):
        out[i] = np.random.random()
    return out
