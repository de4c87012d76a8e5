"""Parameter ingestion and validation for the town simulator.

The full parametrization lives in a YAML document (a versioned default ships
with the package, see ``data/default_town.yaml``).  ``load_config`` parses and
validates it into an immutable :class:`TownConfig`.  Validation failures raise
:class:`ConfigError` naming the offending key.
"""

from __future__ import annotations

import dataclasses
import importlib.resources
from dataclasses import dataclass, field

import numpy as np
import yaml

N_AGE_GROUPS = 17
N_BANDS = 5  # leisure preference bands: 10-19, 20-29, 30-44, 45-64, 65+

# Profession codes, fixed order.
CHILD, BLUE, WHITE, SERVICE, HEALTH, TEACHER, PENSIONER, OWNER = range(8)
PROFESSION_NAMES = (
    "child", "blue_collar", "white_collar", "service",
    "health_care", "teacher", "pensioner", "firm_owner",
)
WORKER_PROFESSIONS = (BLUE, WHITE, SERVICE, HEALTH, TEACHER)
PRIVATE_PROFESSIONS = (BLUE, WHITE, SERVICE)

# Age-group spans per profession (inclusive group indices).
PROFESSION_AGE_SPANS = {
    CHILD: (0, 3),       # 0-19
    BLUE: (4, 12),       # 20-64
    WHITE: (4, 12),
    SERVICE: (4, 12),
    HEALTH: (4, 12),
    TEACHER: (4, 12),
    PENSIONER: (13, 16),  # 65+
    OWNER: (4, 16),       # 20+
}


class ConfigError(ValueError):
    """A configuration document failed validation."""


@dataclass(frozen=True)
class MedicalParams:
    p_hospitalized: tuple[float, ...]
    p_critical: tuple[float, ...]
    p_ward_death: tuple[float, ...]
    incubation_periods: int
    latent_periods: int
    mild_duration: int
    admission_delay: int
    severe_survive_duration: int
    severe_death_duration: int
    critical_survive_duration: int
    critical_death_duration: int
    post_icu_ward_periods: int
    p_die_in_icu: float
    p_die_critical_without_icu: float
    p_die_severe_without_bed: float


@dataclass(frozen=True)
class EpidemicParams:
    infection_probability: float
    max_contacts_per_period: int
    detection_threshold: float
    unable_to_work_threshold: float
    hygiene_factor_default: float
    commercial_standard_capacity: float
    noncommercial_standard_capacity: float
    max_capacity_multiplier: float


@dataclass(frozen=True)
class EconomyParams:
    expected_profit_rate: float
    profit_rate_buffer: float
    rent_tax_rate: float
    unemployment_benefit_rate: float
    sick_pay_rate: float
    quarantine_pay_rate: float
    caregiving_pay_rate: float
    telework_efficiency: float
    caregiving_telework_efficiency: float
    price_step_capacity: float
    price_step_utilization: float
    leisure_splash_fraction: float
    blue_collar_productivity: float
    white_collar_productivity: float
    consumption_reserve_rate: float
    utilization_raise_threshold: float
    utilization_band_low: float
    utilization_band_high: float


@dataclass(frozen=True)
class LocationParams:
    workers_per_factory: int
    workers_per_office: int
    workers_per_commercial_facility: int
    teachers_per_school: int
    hospitals_per_capita: float
    retirement_homes_per_capita: float
    school_class_size: int
    noncommercial_per_commercial: int
    hospital_beds_per_1k: float
    icus_per_100k: float


@dataclass(frozen=True)
class HouseholdParams:
    per_capita: float
    shares: dict[str, float]
    pensioner_residence: dict[str, float]


@dataclass(frozen=True)
class ProfessionParams:
    shares: tuple[float, ...]        # indexed by profession code
    unemployment: tuple[float, ...]
    gross_wages: tuple[float, ...]
    net_wages: tuple[float, ...]


@dataclass(frozen=True)
class LeisureParams:
    band_age_bounds: tuple[int, ...]
    friend_weight_mean: float
    noncommercial_means: tuple[float, ...]
    commercial_means: tuple[float, ...]
    home_means: tuple[float, ...]
    weight_sigma_fraction: float
    attractiveness_mean: float
    attractiveness_ref: float
    commercial_multiplier: float
    commercial_multiplier_ref: float
    friends_min: int
    friends_max: int
    facility_edges_min: int
    facility_edges_max: int
    plan_length: int
    plan_draw_cap: int


@dataclass(frozen=True)
class TownConfig:
    population: int
    scale: int
    initial_infected_fraction: float
    age_group_shares: tuple[float, ...]
    medical: MedicalParams
    epidemic: EpidemicParams
    economy: EconomyParams
    locations: LocationParams
    households: HouseholdParams
    professions: ProfessionParams
    leisure: LeisureParams
    schema_version: int = 1

    def replace(self, **kwargs) -> "TownConfig":
        return dataclasses.replace(self, **kwargs)

    def effective_commercial_means(self) -> np.ndarray:
        """Commercial preference means rescaled to the current multiplier."""
        lp = self.leisure
        scale = lp.commercial_multiplier / lp.commercial_multiplier_ref
        return np.asarray(lp.commercial_means, dtype=float) * scale

    def band_of_age_group(self) -> np.ndarray:
        """Map each of the 17 age groups to a leisure band (-1 for under 10)."""
        bounds = self.leisure.band_age_bounds
        ages_lo = [5 * g for g in range(N_AGE_GROUPS)]
        out = np.full(N_AGE_GROUPS, -1, dtype=np.int8)
        for g, lo in enumerate(ages_lo):
            for b in range(len(bounds) - 1, -1, -1):
                if lo >= bounds[b]:
                    out[g] = b
                    break
        return out


def _get(doc: dict, key: str, section: str = ""):
    if key not in doc:
        where = f"{section}.{key}" if section else key
        raise ConfigError(f"missing key: {where}")
    return doc[key]


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")
    return value


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if value <= 0:
        raise ConfigError(f"{name} must be > 0, got {value}")
    return value


def _check_shares_sum(name: str, values, tol: float = 1e-9) -> None:
    total = float(sum(values))
    if abs(total - 1.0) > tol:
        raise ConfigError(f"{name} must sum to 1 (got {total:.12f})")


def load_config(source) -> TownConfig:
    """Parse and validate a town configuration.

    ``source`` may be a path to a YAML file, a YAML string, or an already
    parsed mapping.  Returns a validated :class:`TownConfig`.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, TypeError):
            text = str(source)
        doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ConfigError("configuration document is not a mapping")
    return _build_config(doc)


def default_config() -> TownConfig:
    """The packaged default parametrization."""
    ref = importlib.resources.files("epitown.data").joinpath("default_town.yaml")
    return load_config(ref.read_text(encoding="utf-8"))


def scenario_path(name: str):
    return importlib.resources.files("epitown.data.scenarios").joinpath(f"{name}.yaml")


def _build_config(doc: dict) -> TownConfig:
    population = int(_get(doc, "population"))
    if population < 0:
        raise ConfigError("population must be >= 0")
    scale = int(doc.get("scale", 1000))
    frac = _check_prob("initial_infected_fraction",
                       _get(doc, "initial_infected_fraction"))

    demo = _get(doc, "demography")
    raw_shares = [float(x) for x in _get(demo, "age_group_shares", "demography")]
    if len(raw_shares) != N_AGE_GROUPS:
        raise ConfigError(f"demography.age_group_shares needs {N_AGE_GROUPS} entries")
    for i, s in enumerate(raw_shares):
        _check_prob(f"age_group_shares[{i}]", s)
    total = sum(raw_shares)
    # Census weights may carry rounding slack; normalize within 3 %.
    if abs(total - 1.0) > 0.03:
        raise ConfigError(f"age_group_shares sum to {total:.5f}, expected ~1")
    if abs(total - 1.0) < 1e-12:
        age_shares = tuple(raw_shares)
    else:
        age_shares = tuple(s / total for s in raw_shares)

    med = _get(doc, "medical")
    rho = {}
    for key in ("p_hospitalized", "p_critical", "p_ward_death"):
        vals = [_check_prob(f"medical.{key}[{i}]", v)
                for i, v in enumerate(_get(med, key, "medical"))]
        if len(vals) != N_AGE_GROUPS:
            raise ConfigError(f"medical.{key} needs {N_AGE_GROUPS} entries")
        rho[key] = tuple(vals)
    durations = {k: int(_get(med, k, "medical")) for k in (
        "incubation_periods", "latent_periods", "mild_duration",
        "admission_delay", "severe_survive_duration", "severe_death_duration",
        "critical_survive_duration", "critical_death_duration",
        "post_icu_ward_periods")}
    for k, v in durations.items():
        if v < 0:
            raise ConfigError(f"medical.{k} must be >= 0")
    if durations["latent_periods"] > durations["incubation_periods"]:
        raise ConfigError("medical.latent_periods must not exceed incubation_periods")
    medical = MedicalParams(
        **rho, **durations,
        p_die_in_icu=_check_prob("medical.p_die_in_icu", _get(med, "p_die_in_icu", "medical")),
        p_die_critical_without_icu=_check_prob(
            "medical.p_die_critical_without_icu",
            _get(med, "p_die_critical_without_icu", "medical")),
        p_die_severe_without_bed=_check_prob(
            "medical.p_die_severe_without_bed",
            _get(med, "p_die_severe_without_bed", "medical")),
    )

    epi = _get(doc, "epidemic")
    gamma = int(_get(epi, "max_contacts_per_period", "epidemic"))
    if gamma < 1:
        raise ConfigError("epidemic.max_contacts_per_period must be >= 1")
    mult = float(_get(epi, "max_capacity_multiplier", "epidemic"))
    if mult < 1:
        raise ConfigError("epidemic.max_capacity_multiplier must be >= 1")
    epidemic = EpidemicParams(
        infection_probability=_check_positive(
            "epidemic.infection_probability",
            _get(epi, "infection_probability", "epidemic")),
        max_contacts_per_period=gamma,
        detection_threshold=_check_prob(
            "epidemic.detection_threshold", _get(epi, "detection_threshold", "epidemic")),
        unable_to_work_threshold=_check_prob(
            "epidemic.unable_to_work_threshold",
            _get(epi, "unable_to_work_threshold", "epidemic")),
        hygiene_factor_default=float(_get(epi, "hygiene_factor_default", "epidemic")),
        commercial_standard_capacity=_check_positive(
            "epidemic.commercial_standard_capacity",
            _get(epi, "commercial_standard_capacity", "epidemic")),
        noncommercial_standard_capacity=_check_positive(
            "epidemic.noncommercial_standard_capacity",
            _get(epi, "noncommercial_standard_capacity", "epidemic")),
        max_capacity_multiplier=mult,
    )
    if epidemic.infection_probability > 1.0:
        raise ConfigError("epidemic.infection_probability must lie in (0, 1]")

    eco = _get(doc, "economy")
    economy = EconomyParams(**{
        f.name: float(_get(eco, f.name, "economy"))
        for f in dataclasses.fields(EconomyParams)})
    for rate_key in ("rent_tax_rate", "unemployment_benefit_rate", "sick_pay_rate",
                     "quarantine_pay_rate", "caregiving_pay_rate",
                     "telework_efficiency", "caregiving_telework_efficiency",
                     "consumption_reserve_rate"):
        _check_prob(f"economy.{rate_key}", getattr(economy, rate_key))
    _check_positive("economy.expected_profit_rate", economy.expected_profit_rate)

    locd = _get(doc, "locations")
    locations = LocationParams(
        workers_per_factory=int(_get(locd, "workers_per_factory", "locations")),
        workers_per_office=int(_get(locd, "workers_per_office", "locations")),
        workers_per_commercial_facility=int(
            _get(locd, "workers_per_commercial_facility", "locations")),
        teachers_per_school=int(_get(locd, "teachers_per_school", "locations")),
        hospitals_per_capita=float(_get(locd, "hospitals_per_capita", "locations")),
        retirement_homes_per_capita=float(
            _get(locd, "retirement_homes_per_capita", "locations")),
        school_class_size=int(_get(locd, "school_class_size", "locations")),
        noncommercial_per_commercial=int(
            _get(locd, "noncommercial_per_commercial", "locations")),
        hospital_beds_per_1k=float(_get(locd, "hospital_beds_per_1k", "locations")),
        icus_per_100k=float(_get(locd, "icus_per_100k", "locations")),
    )
    for f in dataclasses.fields(LocationParams):
        if getattr(locations, f.name) <= 0 and f.name not in (
                "hospitals_per_capita", "retirement_homes_per_capita"):
            raise ConfigError(f"locations.{f.name} must be positive")

    hh = _get(doc, "households")
    hh_shares = {str(k): _check_prob(f"households.shares.{k}", v)
                 for k, v in _get(hh, "shares", "households").items()}
    _check_shares_sum("households.shares", hh_shares.values())
    residence = {str(k): _check_prob(f"households.pensioner_residence.{k}", v)
                 for k, v in _get(hh, "pensioner_residence", "households").items()}
    _check_shares_sum("households.pensioner_residence", residence.values())
    households = HouseholdParams(
        per_capita=_check_prob("households.per_capita", _get(hh, "per_capita", "households")),
        shares=hh_shares, pensioner_residence=residence)

    prof = _get(doc, "professions")
    shares, unemp, gross, net = [], [], [], []
    for name in PROFESSION_NAMES:
        entry = _get(prof, name, "professions")
        shares.append(_check_prob(f"professions.{name}.share", _get(entry, "share", name)))
        unemp.append(_check_prob(f"professions.{name}.unemployment",
                                 _get(entry, "unemployment", name)))
        gross.append(float(_get(entry, "gross_wage", name)))
        net.append(float(_get(entry, "net_wage", name)))
        if net[-1] > gross[-1] + 1e-12:
            raise ConfigError(f"professions.{name}: net wage exceeds gross wage")
    _check_shares_sum("professions shares", shares, tol=1e-9)
    professions = ProfessionParams(tuple(shares), tuple(unemp), tuple(gross), tuple(net))

    leis = _get(doc, "leisure")
    def _band_list(key):
        vals = [float(v) for v in _get(leis, key, "leisure")]
        if len(vals) != N_BANDS:
            raise ConfigError(f"leisure.{key} needs {N_BANDS} entries")
        return tuple(vals)
    leisure = LeisureParams(
        band_age_bounds=tuple(int(v) for v in _get(leis, "band_age_bounds", "leisure")),
        friend_weight_mean=_check_positive(
            "leisure.friend_weight_mean", _get(leis, "friend_weight_mean", "leisure")),
        noncommercial_means=_band_list("noncommercial_means"),
        commercial_means=_band_list("commercial_means"),
        home_means=_band_list("home_means"),
        weight_sigma_fraction=_check_prob(
            "leisure.weight_sigma_fraction", _get(leis, "weight_sigma_fraction", "leisure")),
        attractiveness_mean=_check_positive(
            "leisure.attractiveness_mean", _get(leis, "attractiveness_mean", "leisure")),
        attractiveness_ref=_check_positive(
            "leisure.attractiveness_ref", _get(leis, "attractiveness_ref", "leisure")),
        commercial_multiplier=_check_positive(
            "leisure.commercial_multiplier", _get(leis, "commercial_multiplier", "leisure")),
        commercial_multiplier_ref=_check_positive(
            "leisure.commercial_multiplier_ref",
            _get(leis, "commercial_multiplier_ref", "leisure")),
        friends_min=int(_get(leis, "friends_min", "leisure")),
        friends_max=int(_get(leis, "friends_max", "leisure")),
        facility_edges_min=int(_get(leis, "facility_edges_min", "leisure")),
        facility_edges_max=int(_get(leis, "facility_edges_max", "leisure")),
        plan_length=int(_get(leis, "plan_length", "leisure")),
        plan_draw_cap=int(_get(leis, "plan_draw_cap", "leisure")),
    )
    if leisure.friends_min < 0 or leisure.friends_max < leisure.friends_min:
        raise ConfigError("leisure friend count bounds are inconsistent")
    if leisure.plan_length < 1:
        raise ConfigError("leisure.plan_length must be >= 1")

    return TownConfig(
        population=population,
        scale=scale,
        initial_infected_fraction=frac,
        age_group_shares=age_shares,
        medical=medical,
        epidemic=epidemic,
        economy=economy,
        locations=locations,
        households=households,
        professions=professions,
        leisure=leisure,
        schema_version=int(doc.get("schema_version", 1)),
    )
