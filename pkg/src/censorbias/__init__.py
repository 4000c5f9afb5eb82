"""Censoring-bias toolkit for right-censored survival data.

Simulates virtual trials under a Weibull cure-rate model, applies three
censoring mechanisms (time, interim, case), estimates Kaplan-Meier and
two-group Cox models, and quantifies censoring-induced bias with the
QBI/SQBI, UMBI and ABI/SABI indexes plus ROC-based cutoff calibration.
"""

from .bias import (SABI_SCALE, SQBI_SCALE, AuditRow, BiasReport, abi,
                   bias_report, clinical_bias, qbi, quantile_type7, sabi,
                   signif, sqbi, umbi)
from .dataset import (BUILTIN_DATASETS, DatasetMapping, SurvivalDataset,
                      SurvivalRecord, clinical_preprocess, concat, read_csv,
                      write_csv)
from .errors import (CensorBiasError, DomainError, NoEventsError,
                     NonConvergenceError, SchemaError)
from .estimate import (CoxFit, KMCurve, cox_two_group, km_fit,
                       km_survival_at)
from .experiment import (ExperimentSpec, ExperimentTable, Fixed, TrialResult,
                         Uniform, case_censoring_correlation, parse_sampler,
                         preset_experiment, run_experiment, trial_results)
from .rocstat import RocResult, rescale_index, youden_analysis
from .simulate import (CureModelSpec, RngHandle, case_censoring,
                       complete_follow_up, interim_censoring, open_uniform,
                       time_censoring)
from .weibull import WeibullParams, inverse_weibull, quantiles_to_weibull

__version__ = "0.1.0"

__all__ = [
    "AuditRow", "BiasReport", "BUILTIN_DATASETS", "CensorBiasError",
    "CoxFit", "CureModelSpec", "DatasetMapping", "DomainError",
    "ExperimentSpec", "ExperimentTable", "Fixed", "KMCurve", "NoEventsError",
    "NonConvergenceError", "RngHandle", "RocResult", "SABI_SCALE",
    "SQBI_SCALE", "SchemaError", "SurvivalDataset", "SurvivalRecord",
    "TrialResult", "Uniform", "WeibullParams", "abi", "bias_report",
    "case_censoring", "case_censoring_correlation", "clinical_bias",
    "clinical_preprocess", "complete_follow_up", "concat", "cox_two_group",
    "interim_censoring", "inverse_weibull", "km_fit", "km_survival_at",
    "open_uniform", "parse_sampler", "preset_experiment", "qbi",
    "quantile_type7", "quantiles_to_weibull", "read_csv", "rescale_index",
    "run_experiment", "sabi", "signif", "sqbi", "time_censoring",
    "trial_results", "umbi", "write_csv", "youden_analysis",
]
