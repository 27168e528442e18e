import json

import numpy as np
import pytest

from conftest import bell_state
from qdistill.channels import rho_form1
from qdistill.errors import ConfigError, ParameterMismatchError
from qdistill.fileio import load_state, save_state
from qdistill.measures import chsh_value, measure_state
from qdistill.normal_form import BELL_DIAGONALIZABLE, QUASI_DISTILLABLE
from qdistill.pipeline import (
    ExperimentConfig,
    compare_to_experiment,
    emit_report,
    format_comparison,
    load_report,
    report_to_dict,
    run_experiment,
    write_summary_csv,
)
from qdistill.states import apply_local, ket_to_density

FORM1_CFG = dict(form="form1", a=0.23, p=0.013)


class TestConfig:
    def test_p_out_of_range(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(form="form1", a=0.23, p=1.5)

    def test_amplitude_out_of_range(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(form="form1", a=0.0, p=0.1)

    def test_custom_needs_path(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(form="custom")

    def test_tomo_needs_budget(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(form="form1", mode="tomo", budget=0.0)

    def test_unknown_form(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(form="form3")

    def test_b_derived_from_a(self):
        cfg = ExperimentConfig(form="form1", a=0.6, p=0.0)
        assert abs(cfg.b - 0.8) < 1e-15


class TestIdealMode:
    def test_form1_report(self):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        assert report.classification == BELL_DIAGONALIZABLE
        assert report.measures_after.concurrence > report.measures_before.concurrence
        assert report.measures_after.s_value > report.measures_before.s_value
        assert abs(report.fidelity_to_theory - 1.0) < 1e-9
        sv = report.filter_a.singular_values()
        assert abs(sv[1] - 0.49) < 0.005

    def test_form2_concurrence_closed_form(self):
        values = []
        for a in (0.44, 0.52):
            report = run_experiment(
                ExperimentConfig(form="form2", a=a, p=0.063, mode="ideal")
            )
            assert abs(report.measures_after.concurrence - (1 - 2 * 0.063) ** 2) < 1e-9
            values.append(report.measures_after.concurrence)
        assert abs(values[0] - values[1]) < 1e-9

    def test_internal_consistency(self):
        # Measures recomputed from rho_before and the reported filters must
        # match the report.
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        rederived = apply_local(report.rho_before, report.filter_a, report.filter_b)
        assert np.abs(rederived.state - report.rho_after).max() < 1e-10
        assert abs(rederived.probability - report.success_probability) < 1e-10
        m = measure_state(rederived.state)
        assert abs(m.concurrence - report.measures_after.concurrence) < 1e-10
        assert abs(m.s_value - report.measures_after.s_value) < 1e-10

    def test_s_before_at_after_settings_recorded(self):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        expected = chsh_value(report.rho_before, report.measures_after.settings)
        assert abs(report.s_before_at_after_settings - expected) < 1e-12

    def test_quasi_distillable_input(self, tmp_path):
        state = 0.6 * bell_state("phi+") + 0.4 * ket_to_density(
            np.array([0, 1, 0, 0], complex)
        )
        path = tmp_path / "quasi.json"
        save_state(path, state)
        report = run_experiment(
            ExperimentConfig(form="custom", mode="ideal", custom_state_path=str(path))
        )
        assert report.classification == QUASI_DISTILLABLE
        assert report.rho_after is None
        assert report.filter_a is None


class TestTomographicMode:
    CFG = dict(form="form1", a=0.23, p=0.013, mode="tomo", budget=2e3,
               bootstrap_resamples=8, seed=5)

    def test_report_has_error_bars(self):
        report = run_experiment(ExperimentConfig(**self.CFG))
        for key in ("concurrence", "eof", "s_value"):
            assert report.errors_before[key] > 0
            assert report.errors_after[key] > 0
        assert "bootstrap" in report.metadata["error_bars"]

    def test_determinism_bit_identical_json(self, tmp_path):
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        emit_report(run_experiment(ExperimentConfig(**self.CFG)), p1)
        emit_report(run_experiment(ExperimentConfig(**self.CFG)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_converges_to_ideal_with_budget(self):
        # High-budget tomographic runs agree with ideal mode within two
        # bootstrap standard deviations for at least 90% of seeds.  The
        # after-state depends on both records (the filters come from the
        # reconstructed input), so both bootstrap errors contribute, in
        # quadrature.
        ideal = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        hits = 0
        seeds = range(50)
        for seed in seeds:
            cfg = ExperimentConfig(
                form="form1", a=0.23, p=0.013, mode="tomo", budget=1e6,
                bootstrap_resamples=12, seed=seed,
            )
            report = run_experiment(cfg)
            ok = True
            for key, ideal_value, measured in (
                ("concurrence", ideal.measures_after.concurrence,
                 report.measures_after.concurrence),
                ("s_value", ideal.measures_after.s_value,
                 report.measures_after.s_value),
            ):
                std = max(
                    np.hypot(report.errors_after[key], report.errors_before[key]), 1e-9
                )
                ok = ok and abs(measured - ideal_value) <= 2.0 * std
            hits += ok
        assert hits >= 0.9 * len(seeds)


class TestReportSerialization:
    def test_roundtrip_structurally_identical(self, tmp_path):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        path = tmp_path / "report.json"
        emit_report(report, path)
        back = load_report(path)
        assert report_to_dict(back) == report_to_dict(report)

    def test_schema_keys(self):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        d = report_to_dict(report)
        for key in ("s_before", "s_after", "concurrence_before", "concurrence_after"):
            assert key in d
        assert d["schema_version"] == 1

    def test_matrices_serialized_as_pairs(self):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        d = report_to_dict(report)
        arr = np.asarray(d["rho_before"], dtype=float)
        assert arr.shape == (4, 4, 2)
        # row-major fixed basis: entry [0][0] is the HH population
        assert abs(arr[0, 0, 0] - report.rho_before[0, 0].real) < 1e-15

    def test_table_format(self, tmp_path):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        path = tmp_path / "report.txt"
        emit_report(report, path, fmt="table")
        text = path.read_text()
        assert "concurrence" in text and "before" in text

    def test_summary_csv(self, tmp_path):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        path = tmp_path / "summary.csv"
        write_summary_csv(report, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "quantity,before,after,before_std,after_std"
        assert any(line.startswith("concurrence,") for line in lines)


class TestCompareToExperiment:
    def test_form1_rows(self):
        report = run_experiment(ExperimentConfig(**FORM1_CFG, mode="ideal"))
        comparison = compare_to_experiment(report)
        rows = {r["quantity"]: r for r in comparison["rows"]}
        assert rows["s_after"]["reference_measured"] == "2.175 +- 0.024"
        assert rows["ideal_s_after_as_quoted"]["reference_measured"] == "2.192"
        assert rows["concurrence_before"]["reference_measured"] == "0.248 +- 0.021"
        assert "imperfect preparation" in comparison["note"]
        text = format_comparison(comparison)
        assert "2.175" in text and "not as targets" in text

    def test_form2_rows(self):
        report = run_experiment(
            ExperimentConfig(form="form2", a=0.44, p=0.063, mode="ideal")
        )
        comparison = compare_to_experiment(report)
        rows = {r["quantity"]: r for r in comparison["rows"]}
        assert rows["concurrence_after"]["reference_measured"] == "0.641 +- 0.022"
        assert abs(rows["concurrence_after"]["simulated"] - (1 - 2 * 0.063) ** 2) < 1e-9

    def test_non_reference_config_rejected(self):
        report = run_experiment(
            ExperimentConfig(form="form1", a=0.5, p=0.2, mode="ideal")
        )
        with pytest.raises(ParameterMismatchError):
            compare_to_experiment(report)


class TestStateFiles:
    def test_roundtrip(self, tmp_path):
        rho = rho_form1(0.23, 0.97, 0.013)
        path = tmp_path / "state.json"
        save_state(path, rho)
        assert np.abs(load_state(path) - rho).max() < 1e-12

    def test_non_hermitian_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        pairs = [[[0.25 if i == j else 0.0, 0.0] for j in range(4)] for i in range(4)]
        pairs[0][1] = [0.1, 0.0]  # breaks Hermiticity by 0.1
        path.write_text(json.dumps(pairs))
        with pytest.raises(Exception):
            load_state(path)
