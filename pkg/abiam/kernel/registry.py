"""Parameter names each selectable variant needs.

`load_config` rejects parameter keys that appear nowhere in this table and
reports a missing key together with the variant that asked for it.
"""

COMMON = (
    "climate_period_months",
    "emission_scale",
    "initial_wage",
    "initial_household_cash",
    "initial_firm_cash",
    "initial_bank_equity",
    "initial_energy_cash",
    "markup",
    "k_markup",
    "inventory_target",
    "machine_units",
    "initial_labor_productivity",
    "initial_energy_efficiency",
    "initial_emission_intensity",
    "machine_lifetime",
    "process_productivity",
    "k_emission_intensity",
    "liquidity_buffer",
    "first_round_fraction",
    "shortlist_size",
    "churn_price_probability",
    "churn_unsatisfied_probability",
    "base_rate",
    "reserve_ratio",
    "loan_markups",
    "loan_term",
    "bailout_fraction",
    "bank_bond_share",
    "fuel_price",
    "fuel_base_cost",
    "rest_of_world_propensity",
)

VARIANT_PARAMETERS: dict[str, dict[str, tuple[str, ...]]] = {
    "production": {
        "vintage-crs": (),
        "ces": ("ces_alpha_k", "ces_alpha_l", "ces_alpha_e", "ces_sigma", "ces_scale", "capital_per_unit"),
        "leontief": ("leontief_capital", "leontief_labor", "leontief_resource", "capital_per_unit"),
    },
    "pricing": {
        "markup": ("markup_sensitivity",),
        "tatonnement": ("tatonnement_eta", "theta_up", "theta_down", "adopt_probability"),
    },
    "planning": {
        "dsk": (),
        "abmiam": ("demand_weight",),
        "cfhs": ("supply_adjustment",),
    },
    "wage": {
        "dsk": ("wage_psi_productivity", "wage_psi_price", "wage_psi_unemployment"),
        "grsw": ("wage_cap",),
        "abmiam": ("wage_excess_sensitivity",),
    },
    "household": {
        "dsk": (),
        "abmiam": ("wealth_target", "wealth_adjustment", "income_smoothing"),
        "cfhs": ("consumption_propensity",),
        "grsw": ("savings_drawdown",),
    },
    "goods_market": {
        "share": ("replicator_chi",),
        "logit": ("logit_intensity", "logit_weight_quality", "logit_weight_price", "logit_weight_buyers"),
        "stone-geary": ("sectors", "stone_geary_shares", "stone_geary_minima"),
        "shortlist": (),
    },
    "labor": {
        "random": (),
        "constrained": ("max_new_hires", "max_fire_fraction"),
    },
    "innovation": {
        "nelson-winter": (
            "rd_share",
            "innovation_share",
            "zeta_innovation",
            "zeta_imitation",
            "improvement_alpha",
            "improvement_beta",
            "improvement_low",
            "improvement_high",
        ),
        "exogenous": ("tfp_growth", "tfp_noise"),
        "none": (),
    },
    "exit": {
        "dsk": (),
        "abmiam": ("entry_probability", "entry_premium", "loan_extension_share", "loan_extension_steps"),
        "grsw": ("dormancy_months",),
    },
    "credit": {
        "multiplier": ("credit_multiplier", "debt_to_sales_cap"),
        "basel": ("capital_adequacy", "risk_weight"),
        "reserve": ("debt_to_equity_cap",),
        "unbounded": ("profit_lenience",),
        "none": (),
    },
    "dispatch": {
        "merit-order": ("energy_markup", "power_plants_green_share", "plant_capacity", "plant_lifetime", "thermal_efficiency", "plant_emission_intensity"),
        "cournot": ("cournot_slope", "power_plants_green_share", "plant_capacity", "plant_lifetime", "thermal_efficiency", "plant_emission_intensity"),
        "substeps": (
            "energy_markup",
            "substeps",
            "night_demand_share",
            "availability_concentration",
            "stress_multiplier",
            "transmission_loss",
            "power_plants_green_share",
            "plant_capacity",
            "plant_lifetime",
            "thermal_efficiency",
            "plant_emission_intensity",
        ),
        "none": (),
    },
    "plant_investment": {
        "dsk": ("green_fixed_cost", "discount_rate", "capacity_margin", "energy_rd_share", "energy_zeta"),
        "abmiam": (
            "green_fixed_cost",
            "discount_rate",
            "capacity_margin",
            "plant_capital_exponent",
            "plant_labor_exponent",
            "plant_fuel_exponent",
            "plant_labor_per_capacity",
        ),
        "cfhs": (
            "green_fixed_cost",
            "discount_rate",
            "capacity_margin",
            "capacity_growth_cap",
            "cost_decline_rate",
            "cost_decline_noise",
            "cost_floor",
            "storage_volatility_threshold",
            "storage_ratio",
        ),
    },
    "depreciation": {
        "lifetime": (),
        "tranche": (),
    },
    "fuel_price": {
        "exogenous-path": (),
        "geometric-brownian": ("fuel_drift", "fuel_volatility"),
        "market-cleared": (
            "mine_initial_stock",
            "rogner_curvature",
            "rogner_exponent",
            "mine_max_extraction",
            "mine_pollution",
        ),
    },
    "emission_sources": {"dsk": (), "abmiam": (), "cfhs": (), "grsw": ()},
    "climate": {
        "two-box": (
            "atmosphere_pre",
            "natural_source",
            "uptake_rate",
            "uptake_saturation",
            "forcing_2x",
            "climate_feedback",
            "temperature_timescale",
            "climate_substeps",
        ),
        "tcre": ("tcre",),
        "permanent-transient": ("permanent_fraction", "transient_decay", "climate_sensitivity", "atmosphere_pre"),
        "three-eq": (
            "concentration_pre",
            "kappa_cumulative",
            "kappa_annual",
            "kappa_relax",
            "psi_concentration",
            "psi_temperature",
            "regional_baseline_temperature",
        ),
        "decay": ("decay_rate", "initial_concentration", "climate_sensitivity"),
    },
    "damage": {
        "none": (),
        "beta-stochastic": ("damage_mu0", "damage_mu1", "damage_c0", "damage_c1", "variability_window"),
        "deterministic-quadratic": ("zeta1", "zeta2", "damage_noise"),
        "wealth-elastic": ("zeta1", "zeta2", "wealth_elasticity"),
        "regional-deterministic": ("labor_damage_kappa", "agri_damage", "disaster_loss"),
        "disaster-count": (
            "disaster_base_rate",
            "disaster_acceleration",
            "disaster_fraction",
            "baseline_emissions",
            "health_decay",
            "replacement_months",
        ),
    },
    "monetary": {
        "fixed": (),
        "taylor": ("neutral_rate", "inflation_target", "unemployment_target", "taylor_phi_pi", "taylor_phi_u"),
    },
    "government": {
        "dsk": ("profit_tax", "income_tax", "benefit_fraction"),
        "dskfin": ("profit_tax", "income_tax", "benefit_fraction"),
        "grsw": ("profit_tax", "income_tax", "regional_benefit_fraction", "profit_distribution"),
        "none": (),
    },
}

OPTIONAL = (
    "plant_operating_cost",
    "energy_rd_share",
    "energy_zeta",
    "stress_multiplier",
    "fuel_price_floor",
    "green_intensity_threshold",
)


def known_parameters() -> frozenset[str]:
    names = set(COMMON) | set(OPTIONAL)
    for variants in VARIANT_PARAMETERS.values():
        for params in variants.values():
            names.update(params)
    return frozenset(names)


def required_parameters(selection: dict[str, str]) -> list[tuple[str, str]]:
    """(parameter, variant) pairs the selection needs, in a stable order."""
    needed = [(name, "common") for name in COMMON]
    for selector, variants in VARIANT_PARAMETERS.items():
        variant = selection.get(selector)
        for name in variants.get(variant, ()):
            needed.append((name, f"{selector}={variant}"))
    return needed
