import json

import numpy as np
import pytest

from gradedkms.algebra import OddDensity
from gradedkms.scenarios import (
    ConfigError,
    GibbsRho,
    generate_scenario,
    load_config,
    load_scenario,
    merge_overrides,
    parse_config,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


class TestParseConfig:
    def test_defaults(self):
        config = parse_config({})

        assert (config.n_plus, config.n_minus) == (1, 1)
        assert isinstance(config.rho, GibbsRho)
        assert config.checks == ["all"]

    def test_comma_separated_checks(self):
        config = parse_config({"checks": "algebra, flow"})

        assert config.checks == ["algebra", "flow"]

    @pytest.mark.parametrize(
        "data",
        [
            {"checks": "algebra,prop9"},
            {"seed": -1},
            {"n_plus": 0, "n_minus": 0},
            {"rho": {"kind": "explicit", "eigenvalues": [1.0]}},
            {"rho": {"kind": "explicit", "eigenvalues": [1.0, 0.0]}},
            {"rho": {"kind": "explicit", "eigenvalues": [1.0, 1e-7]}},
            {"rho": {"kind": "gibbs", "spectral_bound": 8.0}},
            {"rho": {"kind": "thermal"}},
            {"tolerance": 0},
            {"net": {"site_dims": [2]}},
            {"net": {"site_dims": [2, 1]}},
            {"net": {"site_dims": [2, 2], "site_gradings": [[1, 1]]}},
            {"net": {"site_dims": [2, 2]}, "n_plus": 3},
        ],
    )
    def test_invalid(self, data):
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_ill_conditioned_allowed(self):
        config = parse_config(
            {
                "rho": {"kind": "explicit", "eigenvalues": [1.0, 1e-7]},
                "allow_ill_conditioned": True,
            }
        )

        assert config.condition_bound == pytest.approx(1e7)

    def test_chain_derives_sectors(self):
        config = parse_config({"net": {"site_dims": "2,2"}})

        assert config.net.site_gradings == [[1, -1], [1, -1]]
        assert (config.n_plus, config.n_minus) == (2, 2)

    def test_error_lists_fields(self):
        with pytest.raises(ConfigError) as e:
            parse_config({"samples": -1})

        assert "samples" in str(e.value)
        assert e.value.errors

    def test_load_config_overrides(self, fixture_path):
        config = load_config(fixture_path("product_chain.yml"), seed=5)

        assert config.seed == 5
        assert config.samples == 20
        assert config.net.site_dims == [2, 2]

    def test_load_config_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.yml")

    def test_load_config_without_file(self):
        config = load_config(seed=4, rho={"kind": "gibbs", "beta": 2.0})

        assert config.seed == 4
        assert config.rho.beta == 2.0

    def test_load_config_merges_nested(self, fixture_path):
        config = load_config(
            fixture_path("product_chain.yml"),
            net={"coupling": 0.2, "beta": None},
        )

        assert config.net.site_dims == [2, 2]
        assert config.net.coupling == 0.2
        assert config.net.beta == 1.0

    def test_merge_replaces_other_kind(self):
        data = {"rho": {"kind": "gibbs", "beta": 2.0}, "seed": 1}
        merged = merge_overrides(
            data, {"rho": {"kind": "explicit", "eigenvalues": [1.0]}}
        )

        assert merged["rho"] == {"kind": "explicit", "eigenvalues": [1.0]}
        assert merged["seed"] == 1
        assert data["rho"]["kind"] == "gibbs"


class TestGenerateScenario:
    def test_reproducible(self):
        config = parse_config({"seed": 11, "n_plus": 2, "n_minus": 1})
        first = generate_scenario(config)
        second = generate_scenario(config)

        assert np.array_equal(first.rho, second.rho)
        assert all(
            np.array_equal(a, b) for a, b in zip(first.samples, second.samples)
        )

    def test_samples_do_not_move_rho(self):
        few = generate_scenario(parse_config({"seed": 4, "samples": 2}))
        many = generate_scenario(parse_config({"seed": 4, "samples": 9}))

        assert np.array_equal(few.rho, many.rho)
        assert len(few.samples) == 4 + 2
        assert len(many.samples) == 4 + 9
        assert np.array_equal(few.random_samples[1], many.random_samples[1])

    def test_even_density(self):
        scenario = generate_scenario(parse_config({"seed": 2, "n_plus": 3}))

        assert scenario.A.parity_residual(scenario.rho) < 1e-12
        assert np.allclose(scenario.rho, scenario.rho.conj().T)

    def test_explicit_rotated(self):
        config = parse_config(
            {
                "seed": 6,
                "n_plus": 2,
                "n_minus": 2,
                "rho": {
                    "kind": "explicit",
                    "eigenvalues": [0.4, 0.3, 0.2, 0.1],
                    "rotate": True,
                },
            }
        )
        scenario = generate_scenario(config)

        assert np.allclose(
            np.linalg.eigvalsh(scenario.rho), [0.1, 0.2, 0.3, 0.4]
        )
        assert scenario.A.parity_residual(scenario.rho) < 1e-12

    def test_normalize(self):
        config = parse_config({"seed": 1, "normalize": True})

        assert np.trace(generate_scenario(config).rho) == pytest.approx(1)

    def test_mismatch_flow(self):
        config = parse_config({"seed": 1, "mismatch_flow": True})
        scenario = generate_scenario(config)

        assert scenario.flow_rho is not None
        assert not np.allclose(scenario.flow().rho, scenario.rho)

    @pytest.mark.parametrize("product", [True, False])
    def test_chain(self, product):
        config = parse_config(
            {"seed": 3, "net": {"site_dims": [2, 2], "product": product}}
        )
        scenario = generate_scenario(config)

        assert scenario.net is not None
        assert scenario.net.is_product == product
        assert np.trace(scenario.rho) == pytest.approx(1)
        assert np.array_equal(scenario.A.signs, scenario.net.A.signs)


class TestScenarioFile:
    def test_worked(self, worked_scenario):
        assert np.array_equal(worked_scenario.rho, np.diag([0.75, 0.25]))
        assert worked_scenario.flow_rho is None
        assert worked_scenario.A.signs.tolist() == [1, -1]
        assert len(worked_scenario.samples) == 4 + 40

    def test_save_and_load(self, tmp_path):
        config = parse_config({"seed": 8, "n_plus": 2, "mismatch_flow": True})
        scenario = generate_scenario(config)
        path = tmp_path / "scenario.json"
        save_scenario(scenario, path)
        loaded = load_scenario(path)

        assert np.array_equal(loaded.rho, scenario.rho)
        assert np.array_equal(loaded.flow_rho, scenario.flow_rho)
        assert np.array_equal(loaded.samples[-1], scenario.samples[-1])

    def test_odd_density(self, fixture_path):
        with pytest.raises(OddDensity):
            load_scenario(fixture_path("odd_density.json"))

    @pytest.mark.parametrize("key", ["config", "g", "rho"])
    def test_missing_key(self, worked_scenario, key):
        data = scenario_to_dict(worked_scenario)
        del data[key]

        with pytest.raises(ConfigError):
            scenario_from_dict(data)

    def test_malformed_matrix(self, worked_scenario):
        data = scenario_to_dict(worked_scenario)
        data["rho"] = [[1.0, 0.0]]

        with pytest.raises(ConfigError):
            scenario_from_dict(data)

    def test_not_json(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text("{", encoding="utf-8")

        with pytest.raises(ConfigError):
            load_scenario(path)

    def test_chain_grading_mismatch(self):
        config = parse_config({"seed": 3, "net": {"site_dims": [2, 2]}})
        scenario = generate_scenario(config)
        data = json.loads(json.dumps(scenario_to_dict(scenario)))
        # swap the first two signs of g
        data["g"][0][0][0], data["g"][1][1][0] = -1.0, 1.0

        with pytest.raises(ConfigError):
            scenario_from_dict(data)
