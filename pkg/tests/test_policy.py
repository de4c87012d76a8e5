import numpy as np
import pytest

from epitown import scenario_schedule
from epitown.config import CHILD, WHITE, ConfigError
from epitown.engine import Simulation
from epitown.policy import PolicySet
from conftest import run_small


class TestSchedules:
    def test_baseline_days(self):
        s = scenario_schedule("baseline")
        assert s.policies_at(0).case_isolation
        assert not s.policies_at(13).schools_closed
        assert s.policies_at(14).schools_closed
        assert not s.policies_at(20).contact_ban
        assert s.policies_at(21).contact_ban

    def test_rapid_schools_close_day_7(self):
        s = scenario_schedule("rapid")
        assert not s.policies_at(6).schools_closed
        assert s.policies_at(7).schools_closed
        assert s.policies_at(14).mandatory_telework

    def test_delayed_contact_ban_day_28(self):
        s = scenario_schedule("delayed")
        assert not s.policies_at(27).contact_ban
        assert s.policies_at(28).contact_ban
        assert s.policies_at(21).schools_closed

    def test_lift_removes_everything(self):
        s = scenario_schedule("baseline_lift100")
        assert s.policies_at(99).contact_ban
        after = s.policies_at(100)
        assert after == PolicySet()

    def test_empty_schedule(self):
        s = scenario_schedule("none")
        assert s.policies_at(500) == PolicySet()

    def test_unknown_name_lists_presets(self):
        with pytest.raises(ConfigError, match="baseline"):
            scenario_schedule("does-not-exist")

    def test_custom_schedule_file(self, tmp_path):
        p = tmp_path / "custom.yaml"
        p.write_text("name: custom\nschedule:\n  - day: 3\n    add: [contact_ban]\n")
        s = scenario_schedule(str(p))
        assert not s.policies_at(2).contact_ban
        assert s.policies_at(3).contact_ban

    def test_nonmonotone_days_rejected(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("name: bad\nschedule:\n"
                     "  - day: 9\n    add: [contact_ban]\n"
                     "  - day: 3\n    add: [schools_closed]\n")
        with pytest.raises(ConfigError, match="nondecreasing"):
            scenario_schedule(str(p))


class TestPolicyParameters:
    def test_defaults(self):
        p = PolicySet()
        assert p.home_multiplier == 1.0
        assert p.hospital_hygiene is None
        assert p.effective_contacts(10) == 10

    def test_social_distancing_values(self):
        p = PolicySet(social_distancing=True)
        assert p.home_multiplier == 2.0
        assert p.effective_contacts(10) == 5  # halved, rounded half up
        assert p.effective_contacts(9) == 5

    def test_sanitary_hospitals(self):
        assert PolicySet(sanitary_hospitals=True).hospital_hygiene == 0.1

    def test_activation_idempotent(self):
        p = PolicySet(contact_ban=True)
        assert p.with_flags(["contact_ban"]) == p

    def test_unknown_flag_rejected(self):
        with pytest.raises(ConfigError):
            PolicySet().with_flags(["curfew"])


class TestPolicyEffects:
    def test_no_schedule_equals_policy_free(self, virus_free_cfg):
        _, a = run_small(virus_free_cfg, scenario="none", seed=3, days=7)
        s_empty = scenario_schedule("none")
        b = Simulation(virus_free_cfg, s_empty, seed=3, days=7).run()
        assert np.array_equal(a.rows, b.rows)

    def test_schools_closed_children_home(self, small_cfg, tmp_path):
        p = tmp_path / "schools.yaml"
        p.write_text("name: schools\nschedule:\n  - day: 0\n    add: [schools_closed]\n")
        cfg = small_cfg.replace(initial_infected_fraction=0.0)
        sim = Simulation(cfg, scenario_schedule(str(p)), seed=5, days=1)
        sim.step_phase(1)  # Monday morning
        town = sim.town
        from epitown.synth import SCHOOL
        kids = town.profession == CHILD
        at = town.loc_now[kids]
        assert not np.any(town.loc_kind[at[at >= 0]] == SCHOOL)

    def test_leisure_closed_service_workers_home(self, small_cfg, tmp_path):
        p = tmp_path / "leis.yaml"
        p.write_text("name: leis\nschedule:\n  - day: 0\n    add: [leisure_closed]\n")
        cfg = small_cfg.replace(initial_infected_fraction=0.0)
        sim = Simulation(cfg, scenario_schedule(str(p)), seed=5, days=2)
        from epitown.synth import COMMERCIAL
        for t in (1, 2, 3, 4, 5):
            sim.step_phase(t)
            town = sim.town
            occupied = town.loc_now[town.loc_now >= 0]
            assert not np.any(town.loc_kind[occupied] == COMMERCIAL)

    def test_mandatory_telework_no_onsite_white_collar(self, small_cfg, tmp_path):
        p = tmp_path / "tw.yaml"
        p.write_text("name: tw\nschedule:\n  - day: 0\n    add: [mandatory_telework]\n")
        cfg = small_cfg.replace(initial_infected_fraction=0.0)
        sim = Simulation(cfg, scenario_schedule(str(p)), seed=5, days=1)
        sim.step_phase(1)
        town = sim.town
        from epitown.synth import OFFICE
        wc = (town.profession == WHITE) & town.employed
        locs = town.loc_now[wc]
        assert not np.any(town.loc_kind[locs[locs >= 0]] == OFFICE)

    def test_contact_ban_zero_friend_meetings(self, small_cfg, tmp_path):
        """Under a contact ban nobody ends a leisure phase at someone else's
        household."""
        p = tmp_path / "ban.yaml"
        p.write_text("name: ban\nschedule:\n  - day: 0\n    add: [contact_ban]\n")
        cfg = small_cfg.replace(initial_infected_fraction=0.0)
        sim = Simulation(cfg, scenario_schedule(str(p)), seed=5, days=1)
        from epitown.synth import HOUSEHOLD, RETIREMENT
        for t in (1, 2):
            sim.step_phase(t)
            town = sim.town
            at_home_kind = np.isin(town.loc_kind[np.maximum(town.loc_now, 0)],
                                   (HOUSEHOLD, RETIREMENT))
            visiting = town.alive & (town.loc_now >= 0) & at_home_kind \
                & (town.loc_now != town.residence_loc) & (town.band >= 0)
            # chaperoned small children are the only legitimate guests
            assert not np.any(visiting)

    def test_lift_restores_defaults(self, small_cfg, tmp_path):
        p = tmp_path / "lift.yaml"
        p.write_text("name: lift\nlift_all_day: 2\nschedule:\n"
                     "  - day: 0\n    add: [social_distancing, contact_ban]\n")
        cfg = small_cfg.replace(initial_infected_fraction=0.0)
        sim = Simulation(cfg, scenario_schedule(str(p)), seed=5, days=3)
        sim.step_phase(1)
        assert sim.policy.social_distancing
        for t in range(2, 8):
            sim.step_phase(t)
        assert sim.policy == PolicySet()
