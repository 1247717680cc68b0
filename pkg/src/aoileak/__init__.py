"""Age of information versus maximal leakage for slotted status-update servers."""

__version__ = "0.1.0"

from .core import (AoiLeakError, EmptyInput, ExtraneousField, LengthMismatch, MissingField,
                   OutOfRange, PolicyKind, PolicySpec, RngStream, TooLarge, Unstable,
                   UnsupportedPolicy, generate_arrivals, validate_policy)
from .age import (AgeFormulaResult, InterArrivalModel, aoi_dad, aoi_from_system_times, aoi_mbt,
                  aoi_rad, renewal_age_pmf, renewal_mean_age)
from .leakage import (LeakageReport, analytic_leakage_rate, conditional_pmf, dad_support_size,
                      max_conditional, maximal_leakage_oracle, verify_lemma1, verify_lemma2)
from .policies import dad_step, mbt_step, rad_step, run_policy
from .sim import (AgeEstimate, SimConfig, decomposition_check, empirical_renewal_age,
                  simulate_aoi)
from .tradeoff import (SweepSpec, TradeoffPoint, fig_dataset, matched_leakage_comparison,
                       optimize_alpha, pareto_sweep)
