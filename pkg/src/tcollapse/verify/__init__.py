"""Verification of entropy admissibility and of the operator's properties."""

from tcollapse.verify.entropy import (EntropyReport, KRamp, boundary_def3_residual,
                                      PINNED_C1, calibrated_tol, implication_check, kinetic_p,
                                      kinetic_residual, kruzhkov_residual, otto_def1_residual,
                                      ramp_bank, refinement_h)
from tcollapse.verify.properties import PropertyResult, operator_property_suite
from tcollapse.verify.testfns import Hat, TestFunction, TestFunctionBank, k_grid

__all__ = [
    "EntropyReport", "PINNED_C1", "Hat", "KRamp", "PropertyResult", "TestFunction", "TestFunctionBank",
    "boundary_def3_residual", "calibrated_tol", "implication_check", "k_grid", "kinetic_p",
    "kinetic_residual", "kruzhkov_residual", "operator_property_suite", "otto_def1_residual",
    "ramp_bank", "refinement_h",
]
