class Config:
    probability_floor = 1e-12
    probability_sum_tolerance = 1e-9
    rank_tolerance = 1e-9
    lp_tolerance = 1e-9
    vertex_enumeration_max_states = 12

    newton_max_iterations = 100
    newton_gradient_tolerance = 1e-12
    newton_stall_tolerance = 1e-8
    armijo_constant = 1e-4
    min_step = 1e-12
    finite_difference_step = 1e-6

    bracket_max_expansions = 200
    bracket_floor_gap = 1e-13
    floor_clamp_gap = 1e-10
    root_max_iterations = 200
    root_xtol = 1e-14
    cache_size = 4096

    constraint_tolerance = 1e-8
    multiplier_log_limit = 700.0
    lambda_logit_cap = 25.0
    bounds_agreement_tolerance = 1e-6
    penalty_check_grid = (-5.0, 5.0, 101)

    mc_steps_per_year = 250
    mc_default_paths = 100_000
    mc_default_seed = 20240101
    mc_batch_size = 10_000
    mc_min_step = 1e-12

    pde_default_grid = (400, 400)
    pde_stationary_deviations = 6.0
    pde_implicit_start_steps = 2
    pde_residual_tolerance = 1e-3
    pde_residual_time_fraction = 0.8
    pde_residual_space_fraction = 0.5

    lattice_default_steps = 200
    lattice_probability_floor = -1e-12

    csv_significant_digits = 12
