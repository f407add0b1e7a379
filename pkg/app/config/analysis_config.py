"""
Configuration settings for the decision procedures.
"""

from app.utils.envManager import get_env_bool, get_env_int


class AnalysisConfig:
    """Default budgets and caps, overridable through the environment."""

    def __init__(self):
        self.budget_n = get_env_int("TYPESEMI_BUDGET_N", 8)
        self.budget_coeff = get_env_int("TYPESEMI_BUDGET_COEFF", 32)
        self.budget_nodes = get_env_int("TYPESEMI_BUDGET_NODES", 1_000_000)
        self.closure_cap = get_env_int("TYPESEMI_CLOSURE_CAP", 4096)
        self.cycle_cap = get_env_int("TYPESEMI_CYCLE_CAP", 10_000)
        self.fm_max_vars = get_env_int("TYPESEMI_FM_MAX_VARS", 8)
        self.extension_pq_cap = get_env_int("TYPESEMI_EXTENSION_PQ_CAP", 16)
        self.extension_k_cap = get_env_int("TYPESEMI_EXTENSION_K_CAP", 8)
        self.modulus_cap = get_env_int("TYPESEMI_MODULUS_CAP", 12, minimum=2)
        self.include_timing = get_env_bool("TYPESEMI_INCLUDE_TIMING", False)

    def describe(self) -> dict:
        """Return the effective settings, as recorded in reports."""
        return dict(vars(self))


analysis_config = AnalysisConfig()
