"""Money flows: incomes and transfers, consumption, the daily goods market,
leisure pricing, weekly profits, the labor market and the government ledger.

Every function is a pure transfer between wallets, firm funds and the
government ledger, so total money is invariant (the engine audits this every
period).  All monetary quantities are in daily gross service-worker wages.
"""

from __future__ import annotations

import numpy as np

from .config import BLUE, CHILD, HEALTH, PENSIONER, SERVICE, TEACHER, WHITE
from .synth import F_COMMERCIAL, F_FACTORY, F_OFFICE, Town

# work status codes (shared with social.py)
OFF = 0
ON_SITE = 1
TELEWORK = 2
TELEWORK_CARE = 3
HOME_CARE = 4
HOME_SICK = 5
HOME_ISOLATED = 6
HOME_CLOSED = 7
CLOSED_PAID = 8  # teachers during a school closure keep full pay

WORKING_STATUSES = (ON_SITE, TELEWORK, TELEWORK_CARE, CLOSED_PAID)


def rent_for(funds: float, expected_profit_rate: float) -> float:
    """Daily rent a firm pays its owner, zero when funds are exhausted."""
    if funds <= 0.0:
        return 0.0
    return funds * expected_profit_rate / (1.0 + expected_profit_rate)


def splash_spend(price: float, available: float, splash_fraction: float) -> float:
    """Commercial visit outlay: entry price plus a cut of the surplus."""
    return price + splash_fraction * (available - price)


def consumption_split(town: Town):
    """Daily consumption reserve and its goods/leisure split.

    Reserves a fixed fraction of the larger of current funds and weekly
    income, capped at current funds so wallets never go negative.  The
    leisure share ``h`` of the reserve feeds the leisure purse unless that
    purse already holds at least the agent's funds, in which case the whole
    reserve buys goods.
    """
    rate = town.cfg.economy.consumption_reserve_rate
    mc = rate * np.maximum(town.wallet, town.window_sum)
    mc = np.minimum(mc, town.wallet)
    mc = np.where(town.alive & (mc > 0.0), mc, 0.0)
    contrib = np.where(town.m_l >= town.wallet, 0.0, mc * town.h)
    goods = mc - contrib
    return mc, contrib, goods


def reserve_consumption(town: Town) -> None:
    mc, contrib, goods = consumption_split(town)
    town.wallet -= contrib
    town.m_l += contrib
    town.goods_budget = goods


def clear_goods_market(town: Town, g_t: float):
    """Daily market clearing: one price equates nominal demand and supply.

    With zero supply the day is degenerate: budgets stay in wallets and the
    government purchase is not spent.  Returns the clearing price (None on a
    degenerate day).
    """
    supply = float(np.sum(town.day_output))
    budgets = np.where(town.alive, town.goods_budget, 0.0)
    demand = float(np.sum(budgets)) + g_t
    town.goods_budget[:] = 0.0
    if supply <= 0.0:
        town.last_goods_price = None
        return None
    p = demand / supply
    town.wallet -= budgets
    revenue = town.day_output * p
    town.firm_funds += revenue
    town.week_sales += revenue
    town.gov.savings -= g_t
    town.day_output[:] = 0.0
    town.last_goods_price = p
    return p


def pay_rents(town: Town, record: bool = True) -> None:
    """Daily rent flow from positive-fund firms to owners, taxed at source."""
    eco = town.cfg.economy
    k = eco.expected_profit_rate / (1.0 + eco.expected_profit_rate)
    payable = town.firm_active & (town.firm_funds > 0.0) & (town.firm_owner >= 0)
    if not payable.any():
        return
    rents = np.where(payable, town.firm_funds * k, 0.0)
    town.firm_funds -= rents
    net = rents * (1.0 - eco.rent_tax_rate)
    tax = rents - net
    idx = np.nonzero(payable)[0]
    owners = town.firm_owner[idx]
    if record:
        town.record_income(owners, net[idx])
    else:
        np.add.at(town.wallet, owners, net[idx])
    town.gov.savings += float(np.sum(tax))


def produce(town: Town, statuses: np.ndarray) -> None:
    """Phase-1 production of factories and offices into the day's supply."""
    eco = town.cfg.economy
    prof = town.profession
    firm = town.workplace_firm
    n_firms = len(town.firm_kind)
    if n_firms == 0:
        return
    on_site = (statuses == ON_SITE)
    bc = on_site & (prof == BLUE) & (firm >= 0)
    n1_f = np.bincount(firm[bc], minlength=n_firms)
    wc_mask = (prof == WHITE) & (firm >= 0)
    n1_o = np.bincount(firm[wc_mask & on_site], minlength=n_firms)
    n2_o = np.bincount(firm[wc_mask & (statuses == TELEWORK)], minlength=n_firms)
    n3_o = np.bincount(firm[wc_mask & (statuses == TELEWORK_CARE)], minlength=n_firms)
    y = np.zeros(n_firms)
    fac = town.firm_kind == F_FACTORY
    off = town.firm_kind == F_OFFICE
    y[fac] = eco.blue_collar_productivity * n1_f[fac]
    d2 = eco.telework_efficiency
    d3 = eco.caregiving_telework_efficiency
    y[off] = eco.white_collar_productivity * (n1_o[off] + d2 * n2_o[off] + d2 * d3 * n3_o[off])
    town.day_output += y


def _benefit_rate(town: Town, status: int) -> float:
    eco = town.cfg.economy
    return {HOME_SICK: eco.sick_pay_rate,
            HOME_ISOLATED: eco.quarantine_pay_rate,
            HOME_CLOSED: eco.quarantine_pay_rate,
            HOME_CARE: eco.caregiving_pay_rate}[status]


def pay_daily_incomes(town: Town, statuses: np.ndarray) -> None:
    """Phase-1 weekday payments: wages, transfers, benefits.

    Private-sector wage replacements for prevented workers are routed through
    the employer and appear symmetrically in its weekly sales and costs, so
    firms are pure pass-throughs for benefits.
    """
    cfg = town.cfg
    prof_p = cfg.professions
    prof = town.profession
    gov = town.gov
    alive = town.alive

    # transfers paid directly by the government
    for p, amount in ((CHILD, prof_p.net_wages[CHILD]),
                      (PENSIONER, prof_p.net_wages[PENSIONER])):
        m = alive & (prof == p)
        idx = np.nonzero(m)[0]
        if idx.size:
            town.record_income(idx, np.full(idx.size, amount))
            gov.savings -= amount * idx.size
    for p in (BLUE, WHITE, SERVICE, HEALTH, TEACHER):
        m = alive & (prof == p) & ~town.employed
        idx = np.nonzero(m)[0]
        if idx.size:
            b = cfg.economy.unemployment_benefit_rate * prof_p.net_wages[p]
            town.record_income(idx, np.full(idx.size, b))
            gov.savings -= b * idx.size

    # private daily earners: blue and white collar through their firm
    for p in (BLUE, WHITE):
        gross, net = prof_p.gross_wages[p], prof_p.net_wages[p]
        base = alive & (prof == p) & town.employed
        working = base & np.isin(statuses, WORKING_STATUSES)
        idx = np.nonzero(working)[0]
        if idx.size:
            firms = town.workplace_firm[idx]
            np.add.at(town.firm_funds, firms, -gross)
            np.add.at(town.week_costs, firms, gross)
            town.record_income(idx, np.full(idx.size, net))
            gov.savings += (gross - net) * idx.size
        for status in (HOME_SICK, HOME_ISOLATED, HOME_CARE):
            m = base & (statuses == status)
            idx = np.nonzero(m)[0]
            if idx.size:
                amt = _benefit_rate(town, status) * net
                firms = town.workplace_firm[idx]
                np.add.at(town.week_sales, firms, amt)
                np.add.at(town.week_costs, firms, amt)
                town.record_income(idx, np.full(idx.size, amt))
                gov.savings -= amt * idx.size

    # teachers: government payroll, net wages only
    net = prof_p.net_wages[TEACHER]
    base = alive & (prof == TEACHER) & town.employed
    working = base & np.isin(statuses, WORKING_STATUSES)
    idx = np.nonzero(working)[0]
    if idx.size:
        town.record_income(idx, np.full(idx.size, net))
        gov.savings -= net * idx.size
    for status in (HOME_SICK, HOME_ISOLATED, HOME_CARE):
        m = base & (statuses == status)
        idx = np.nonzero(m)[0]
        if idx.size:
            amt = _benefit_rate(town, status) * net
            town.record_income(idx, np.full(idx.size, amt))
            gov.savings -= amt * idx.size


def pay_shift_wages(town: Town, scheduled: np.ndarray, statuses: np.ndarray) -> None:
    """Per-shift pay for service and health-care workers.

    Service workers are paid by their facility when working, by the
    government (through the facility's books) when prevented.  Health-care
    workers are on the government payroll either way.
    """
    cfg = town.cfg
    prof_p = cfg.professions
    prof = town.profession
    gov = town.gov

    base = scheduled & (prof == SERVICE)
    gross, net = prof_p.gross_wages[SERVICE], prof_p.net_wages[SERVICE]
    idx = np.nonzero(base & (statuses == ON_SITE))[0]
    if idx.size:
        firms = town.workplace_firm[idx]
        np.add.at(town.firm_funds, firms, -gross)
        np.add.at(town.week_costs, firms, gross)
        town.record_income(idx, np.full(idx.size, net))
        gov.savings += (gross - net) * idx.size
    for status in (HOME_SICK, HOME_ISOLATED, HOME_CLOSED, HOME_CARE):
        idx = np.nonzero(base & (statuses == status))[0]
        if idx.size:
            amt = _benefit_rate(town, status) * net
            firms = town.workplace_firm[idx]
            np.add.at(town.week_sales, firms, amt)
            np.add.at(town.week_costs, firms, amt)
            town.record_income(idx, np.full(idx.size, amt))
            gov.savings -= amt * idx.size

    base = scheduled & (prof == HEALTH)
    net = prof_p.net_wages[HEALTH]
    idx = np.nonzero(base & (statuses == ON_SITE))[0]
    if idx.size:
        town.record_income(idx, np.full(idx.size, net))
        gov.savings -= net * idx.size
    for status in (HOME_SICK, HOME_ISOLATED, HOME_CARE):
        idx = np.nonzero(base & (statuses == status))[0]
        if idx.size:
            amt = _benefit_rate(town, status) * net
            town.record_income(idx, np.full(idx.size, amt))
            gov.savings -= amt * idx.size


def adjust_leisure_price(town: Town, f: int) -> None:
    """Weekly price update from per-open-shift average utilization."""
    eco = town.cfg.economy
    loc = town.firm_loc[f]
    ubar = town.week_guests[f] / 14.0
    if ubar / town.loc_theta_max[loc] > eco.utilization_raise_threshold:
        town.firm_price[f] *= (1.0 + eco.price_step_capacity)
    elif ubar / town.loc_theta_std[loc] < eco.utilization_band_low:
        town.firm_price[f] *= (1.0 - eco.price_step_utilization)
    elif ubar / town.loc_theta_std[loc] > eco.utilization_band_high:
        town.firm_price[f] *= (1.0 + eco.price_step_utilization)


def weekly_profit(town: Town, f: int):
    """(profit, profit rate) over the closing week; rate None without costs."""
    c = float(town.week_costs[f])
    s = float(town.week_sales[f])
    if c <= 0.0:
        return s - c, None
    return s - c, (s - c) / c


FIRM_PROFESSION = {F_FACTORY: BLUE, F_OFFICE: WHITE, F_COMMERCIAL: SERVICE}


def labor_market_step(town: Town, f: int, profit_rate, rng_events) -> str | None:
    """Sunday hire/fire decision for one firm.

    One worker is hired when the realized profit rate beats the expected
    rate by more than the buffer, one fired in the mirror case.  A one-worker
    firm only fires (and dissolves, closing its facility for good) when its
    funds are negative.
    """
    if profit_rate is None:
        return None
    eco = town.cfg.economy
    gap = profit_rate - eco.expected_profit_rate
    prof = FIRM_PROFESSION[int(town.firm_kind[f])]
    if gap > eco.profit_rate_buffer:
        pool = town.unemployed_pool[prof]
        if not pool:
            return None
        a = pool.pop(int(rng_events.integers(len(pool))))
        town.employed[a] = True
        town.workplace_firm[a] = f
        town.workplace_loc[a] = town.firm_loc[f]
        town.firm_members[f].append(a)
        return "hire"
    if -gap > eco.profit_rate_buffer:
        members = town.firm_members[f]
        if len(members) > 1:
            a = members.pop(int(rng_events.integers(len(members))))
            _to_unemployment(town, a, prof)
            return "fire"
        if len(members) == 1 and town.firm_funds[f] < 0.0:
            a = members.pop()
            _to_unemployment(town, a, prof)
            _dissolve(town, f)
            return "dissolve"
    return None


def _to_unemployment(town: Town, a: int, prof: int) -> None:
    town.employed[a] = False
    town.workplace_firm[a] = -1
    town.workplace_loc[a] = -1
    town.unemployed_pool[prof].append(a)


def _dissolve(town: Town, f: int) -> None:
    town.firm_active[f] = False
    loc = town.firm_loc[f]
    town.loc_closed[loc] = True
    # residual funds (negative by the dissolution condition) settle against
    # the government ledger to keep the money stock closed
    town.gov.savings += float(town.firm_funds[f])
    town.firm_funds[f] = 0.0
    if town.firm_kind[f] == F_COMMERCIAL:
        cidx = np.nonzero(town.c_loc == loc)[0]
        if cidx.size:
            town.c_edge_active[town.c_idx == cidx[0]] = False
        town.dissolved_commercial = getattr(town, "dissolved_commercial", 0) + 1


def weekly_close(town: Town, rng_events) -> dict:
    """Sunday-night bookkeeping: profits, price review, labor market."""
    n_firms = len(town.firm_kind)
    rates = [None] * n_firms
    for f in range(n_firms):
        if town.firm_active[f]:
            rates[f] = weekly_profit(town, f)[1]
    for f in town.commercial_firms:
        if town.firm_active[f]:
            adjust_leisure_price(town, int(f))
    events = {"hire": 0, "fire": 0, "dissolve": 0}
    for f in range(n_firms):
        if town.firm_active[f]:
            ev = labor_market_step(town, f, rates[f], rng_events)
            if ev:
                events[ev] += 1
    town.week_sales[:] = 0.0
    town.week_costs[:] = 0.0
    town.week_guests[:] = 0.0
    return events


def unemployment_rate_private(town: Town) -> float:
    """Jobless share of the living private labor force (bc, wc, service)."""
    m = town.alive & np.isin(town.profession, (BLUE, WHITE, SERVICE))
    total = int(np.count_nonzero(m))
    if total == 0:
        return 0.0
    return 1.0 - int(np.count_nonzero(m & town.employed)) / total
