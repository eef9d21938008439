"""Scenario parsing, validation, and builder tests.

Parsing must be strict (unknown tables/keys are hard errors naming the
offending path) and the builders must hand back objects consistent with
the analytic ingredients they name.
"""

import math

import numpy as np
import pytest

from fractail.scenario import (
    ConfigError,
    EXPERIMENT_KINDS,
    build_observation,
    build_profile,
    build_second_profile,
    build_source,
    build_system,
    build_time_grid,
    parse_scenario,
)

BASE_TAIL = """
[scenario]
kind = "tail"
alpha = 0.5

[time_grid]
t_min = 100.0
t_max = 1e6
"""


class TestParsing:
    def test_minimal_scenario_defaults(self):
        sc = parse_scenario(BASE_TAIL)
        assert sc.kind == "tail"
        assert sc.alpha == 0.5
        assert sc.rng_seed == 0
        assert sc.operator.kind == "laplacian"
        assert sc.operator.n_modes == 64
        assert sc.t0 == 1.0
        assert sc.mu_segments == ((0.0, 1.0, (1.0,)),)
        assert sc.grid.points_per_decade == 16
        assert sc.inverse.K == 6 and sc.inverse.M == 6
        assert sc.inverse.noise_level == 0.0
        assert sc.output_prefix == "run"
        assert sc.tolerances == {}

    def test_unknown_table_rejected(self):
        with pytest.raises(ConfigError, match=r"unknown table \[grid\]"):
            parse_scenario(BASE_TAIL + "\n[grid]\nt_min = 1.0\n")

    def test_unknown_key_rejected_with_path(self):
        with pytest.raises(ConfigError, match=r"unknown key 'time_grid\.bogus'"):
            parse_scenario(BASE_TAIL + "bogus = 3\n")

    def test_toml_syntax_error_wrapped(self):
        with pytest.raises(ConfigError, match="TOML parse error"):
            parse_scenario("[scenario\nkind = 'tail'")

    def test_unknown_kind_lists_choices(self):
        bad = BASE_TAIL.replace('kind = "tail"', 'kind = "sideways"')
        with pytest.raises(ConfigError, match="'scenario.kind' must be one of"):
            parse_scenario(bad)
        assert len(EXPERIMENT_KINDS) == 7

    def test_alpha_range_enforced(self):
        for alpha in ("0.0", "2.0", "-0.3"):
            bad = BASE_TAIL.replace("alpha = 0.5", f"alpha = {alpha}")
            with pytest.raises(ConfigError, match="'scenario.alpha'"):
                parse_scenario(bad)

    def test_classical_order_only_for_heat_contrast(self):
        bad = BASE_TAIL.replace("alpha = 0.5", "alpha = 1.0")
        with pytest.raises(ConfigError, match="heat-contrast"):
            parse_scenario(bad)
        ok = bad.replace('kind = "tail"', 'kind = "heat-contrast"')
        ok += "\n[source]\nf_modal = [1.0]\n"
        assert parse_scenario(ok).alpha == 1.0

    def test_scalar_requires_subdiffusive_order(self):
        bad = """
[scenario]
kind = "scalar"
alpha = 1.5

[time_grid]
t_min = 100.0
t_max = 1e6
"""
        with pytest.raises(ConfigError, match=r"in \(0, 1\)"):
            parse_scenario(bad)

    def test_grid_must_start_beyond_source_support(self):
        bad = BASE_TAIL.replace("t_min = 100.0", "t_min = 0.5")
        with pytest.raises(ConfigError, match="'time_grid.t_min' must exceed"):
            parse_scenario(bad)

    def test_tail_kinds_require_time_grid(self):
        with pytest.raises(ConfigError, match=r"requires a \[time_grid\]"):
            parse_scenario('[scenario]\nkind = "forward"\nalpha = 0.5\n')

    def test_extract_requires_spatial_source(self):
        bad = BASE_TAIL.replace('kind = "tail"', 'kind = "extract"')
        with pytest.raises(ConfigError, match="f_modal.*f_profile"):
            parse_scenario(bad)

    def test_mlf_table_requires_beta_and_grid(self):
        with pytest.raises(ConfigError, match="requires 'mlf.beta'"):
            parse_scenario(
                '[scenario]\nkind = "mlf-table"\nalpha = 0.5\n'
                "[time_grid]\nt_min = 0.01\nt_max = 10.0\n"
            )
        with pytest.raises(ConfigError, match=r"requires a \[time_grid\]"):
            parse_scenario(
                '[scenario]\nkind = "mlf-table"\nalpha = 0.5\n[mlf]\nbeta = 1.0\n'
            )

    def test_wrong_types_name_the_field(self):
        bad = BASE_TAIL.replace("alpha = 0.5", 'alpha = "fast"')
        with pytest.raises(ConfigError, match="'scenario.alpha' must be a number"):
            parse_scenario(bad)
        bad = BASE_TAIL + "\n[scenario]\nrng_seed = 1.5\n"
        # duplicate table is a TOML error; set the seed in the original table
        bad = BASE_TAIL.replace("alpha = 0.5", "alpha = 0.5\nrng_seed = 1.5")
        with pytest.raises(ConfigError, match="'scenario.rng_seed' must be an integer"):
            parse_scenario(bad)
        bad = BASE_TAIL + "\n[tolerances]\nslope = \"tight\"\n"
        with pytest.raises(ConfigError, match="'tolerances.slope'"):
            parse_scenario(bad)

    def test_booleans_are_not_numbers(self):
        bad = BASE_TAIL.replace("alpha = 0.5", "alpha = true")
        with pytest.raises(ConfigError, match="'scenario.alpha'"):
            parse_scenario(bad)

    def test_mu_segments_shape_errors(self):
        bad = BASE_TAIL + "\n[source]\nmu_segments = [[0.0, 1.0]]\n"
        with pytest.raises(
            ConfigError, match=r"'source.mu_segments\[0\]' must be \[lo, hi, coeffs\]"
        ):
            parse_scenario(bad)
        bad = BASE_TAIL + '\n[source]\nmu_segments = [[0.0, 1.0, ["x"]]]\n'
        with pytest.raises(ConfigError, match=r"mu_segments\[0\]\.coeffs\[0\]"):
            parse_scenario(bad)

    def test_modal_and_named_profile_conflict(self):
        bad = BASE_TAIL + '\n[source]\nf_modal = [1.0]\nf_profile = "one"\n'
        with pytest.raises(ConfigError, match="not both"):
            parse_scenario(bad)

    def test_observation_validation(self):
        bad = BASE_TAIL + '\n[observation]\nkind = "boundary"\n'
        with pytest.raises(ConfigError, match="'observation.kind'"):
            parse_scenario(bad)
        bad = BASE_TAIL + '\n[observation]\nkind = "interior"\nregion = [0.9, 0.1]\n'
        with pytest.raises(ConfigError, match="lo < hi"):
            parse_scenario(bad)

    def test_points_per_decade_positive(self):
        bad = BASE_TAIL + "points_per_decade = 0\n"
        with pytest.raises(ConfigError, match="points_per_decade"):
            parse_scenario(bad)

    def test_tolerances_echoed(self):
        sc = parse_scenario(BASE_TAIL + "\n[tolerances]\nslope_rel_dev = 0.05\n")
        assert sc.tolerances == {"slope_rel_dev": 0.05}

    def test_digest_stable_and_content_sensitive(self):
        a = parse_scenario(BASE_TAIL)
        b = parse_scenario(BASE_TAIL)
        c = parse_scenario(BASE_TAIL + "\n# trailing comment\n")
        assert a.digest == b.digest
        assert a.digest != c.digest
        assert len(a.digest) == 64


class TestBuilders:
    def test_laplacian_system(self):
        sc = parse_scenario(BASE_TAIL)
        system = build_system(sc)
        assert system.n_modes == 64
        assert system.eigenvalues[0] == pytest.approx(math.pi**2, rel=1e-12)
        assert system.eigenvalues[1] == pytest.approx(4 * math.pi**2, rel=1e-12)

    def test_sturm_liouville_system_with_shift(self):
        text = BASE_TAIL + (
            "\n[operator]\n"
            'kind = "sturm_liouville"\n'
            "n_modes = 3\n"
            "grid_size = 600\n"
            "a_values = [1.0, 1.0]\n"
            "c_values = [-7.0, -7.0]\n"
        )
        system = build_system(parse_scenario(text))
        assert system.eigenvalues[0] == pytest.approx(math.pi**2 + 7.0, rel=1e-3)

    def test_build_source_piecewise(self):
        sc = parse_scenario(
            BASE_TAIL + "\n[source]\nmu_segments = [[0.0, 1.0, [1.0, 1.0]]]\n"
        )
        source = build_source(sc)
        assert source.t0 == 1.0
        assert source.mu(0.5) == pytest.approx(1.5)

    def test_build_source_support_mismatch(self):
        sc = parse_scenario(
            BASE_TAIL + "\n[source]\nt0 = 2.0\nmu_segments = [[0.0, 1.0, [1.0]]]\n"
        )
        with pytest.raises(ConfigError, match="mu_segments"):
            build_source(sc)

    def test_engineered_source_orthogonal_to_heat_mode(self):
        text = """
[scenario]
kind = "heat-contrast"
alpha = 1.0

[source]
engineered_mode = 1
f_modal = [1.0]

[time_grid]
t_min = 5.0
t_max = 70.0
"""
        sc = parse_scenario(text)
        system = build_system(sc)
        source = build_source(sc, system)
        lam = float(system.eigenvalues[0])
        # the source is constant on each half of the support, so the
        # exponentially weighted integral has an elementary closed form
        v1 = float(source.mu(0.25))
        v2 = float(source.mu(0.75))
        half = math.exp(lam / 2.0)
        integral = (v1 * (half - 1.0) + v2 * (math.exp(lam) - half)) / lam
        scale = (abs(v1) * (half - 1.0) + abs(v2) * (math.exp(lam) - half)) / lam
        assert abs(integral) <= 1e-10 * scale

    def test_modal_profile_padding_and_overflow(self):
        sc = parse_scenario(
            BASE_TAIL.replace('kind = "tail"', 'kind = "extract"')
            + "\n[source]\nf_modal = [1.0, 0.5]\n"
        )
        system = build_system(sc)
        profile = build_profile(sc, system)
        assert profile.modal_coefficients.shape == (64,)
        assert profile.modal_coefficients[1] == 0.5
        assert np.all(profile.modal_coefficients[2:] == 0.0)
        big = parse_scenario(
            BASE_TAIL.replace('kind = "tail"', 'kind = "extract"')
            + "\n[operator]\nn_modes = 2\n[source]\nf_modal = [1.0, 0.5, 0.25]\n"
        )
        with pytest.raises(ConfigError, match="f_modal"):
            build_profile(big, build_system(big))

    def test_named_profiles_project_correctly(self):
        base = BASE_TAIL.replace('kind = "tail"', 'kind = "extract"')
        system = build_system(parse_scenario(base + '\n[source]\nf_profile = "one"\n'))
        sc = parse_scenario(base + '\n[source]\nf_profile = "mode:2"\n')
        profile = build_profile(sc, system)
        assert profile.modal_coefficients[1] == pytest.approx(1.0, abs=1e-8)
        assert abs(profile.modal_coefficients[0]) < 1e-8
        sc_one = parse_scenario(base + '\n[source]\nf_profile = "one"\n')
        coeffs = build_profile(sc_one, system).modal_coefficients
        assert coeffs[0] == pytest.approx(2.0 * math.sqrt(2.0) / math.pi, rel=1e-8)

    def test_unknown_profile_names_rejected(self):
        base = BASE_TAIL.replace('kind = "tail"', 'kind = "extract"')
        for name in ("wiggle", "mode:x", "mode:0"):
            sc = parse_scenario(base + f'\n[source]\nf_profile = "{name}"\n')
            with pytest.raises(ConfigError):
                build_profile(sc, build_system(sc))

    def test_second_profile_defaults_to_none(self):
        sc = parse_scenario(BASE_TAIL)
        system = build_system(sc)
        assert build_second_profile(sc, system) is None
        sc2 = parse_scenario(BASE_TAIL + "\n[source]\nf2_modal = [0.0, 1.0]\n")
        prof = build_second_profile(sc2, system)
        assert prof.modal_coefficients[1] == 1.0

    def test_observation_builders(self):
        sc = parse_scenario(BASE_TAIL)
        system = build_system(sc)
        assert build_observation(sc, system) is None
        sc_int = parse_scenario(
            BASE_TAIL + '\n[observation]\nkind = "interior"\ntest_function = "mode:1"\n'
        )
        obs = build_observation(sc_int, system)
        assert obs.kind == "interior"
        sc_flux = parse_scenario(BASE_TAIL + '\n[observation]\nkind = "flux"\n')
        flux = build_observation(sc_flux, system)
        assert flux.kind == "flux"
        assert flux.region == (1.0,)
        sc_bad = parse_scenario(
            BASE_TAIL + '\n[observation]\nkind = "flux"\npoint = 0.5\n'
        )
        with pytest.raises(ConfigError, match="'observation.point'"):
            build_observation(sc_bad, system)

    def test_time_grid_density(self):
        sc = parse_scenario(BASE_TAIL)
        grid = build_time_grid(sc)
        assert grid.size == 65  # four decades at sixteen points per decade
        assert grid[0] == pytest.approx(100.0)
        assert grid[-1] == pytest.approx(1e6)
        ratios = grid[1:] / grid[:-1]
        assert np.allclose(ratios, ratios[0], rtol=1e-12)
