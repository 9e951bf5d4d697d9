"""Which config key feeds each parameter of each public operation.

Values are ``"kind:key"`` (a key of that kind's config section, or of
``[experiment]`` as ``experiment:key``) or ``"derived: reason"`` for
parameters computed by the runner from other keys or fixed at a default.
"""

from __future__ import annotations

from . import analysis, breather, grid, hamiltonian, heat, spectral, ucp, wegner

D_GRID = "derived: grid built from d, L, m, bc"
D_OP = "derived: operator assembled from grid and potential"
D_SPEC = "derived: eigenpairs below b of the assembled operator"
D_MASK = "derived: mask built from the generated sequence"
D_RF = "derived: random field built from the family/profile/measure keys"
D_SEED = "derived: experiment:seed or a seed derived from it"
D_WORKERS = "experiment:workers"
D_DEFAULT = "derived: fixed solver default"
D_VNORM = "derived: sup norm of the sampled potential"

COVERAGE = {
    grid.make_grid: {"d": "ucp:d", "L": "ucp:L", "m": "ucp:m", "bc": "ucp:bc",
                     "cap": D_DEFAULT},
    grid.generate_sequence: {"G": "ucp:G", "delta": "ucp:delta", "d": "ucp:d", "L": "ucp:L",
                             "mode": "ucp:mode", "seed": D_SEED},
    grid.build_mask: {"seq": "derived: generated sequence", "grid": D_GRID},
    grid.verify_delone: {"dset": "wegner:delone", "region": "derived: box of side L",
                         "pitch": D_DEFAULT},
    hamiltonian.sample_potential: {"description": "ucp:potential", "grid": D_GRID},
    hamiltonian.assemble: {"grid": D_GRID, "potential": "ucp:potential", "t": "ucp:t"},
    spectral.eigs_below: {"op": D_OP, "b": "ucp:b", "tol": "ucp:tol", "dense_cap": D_DEFAULT,
                          "method": D_DEFAULT, "block": D_DEFAULT, "max_basis": D_DEFAULT},
    spectral.eigvals_below: {"op": D_OP, "b": "derived: E + max eps",
                             "dense_cap": D_DEFAULT},
    ucp.ucp_constant_exact: {"spec": D_SPEC, "mask": D_MASK, "use_indicator": D_DEFAULT},
    ucp.c_sfuc: {"d": "ucp:d", "delta": "ucp:delta", "b": "ucp:b", "v_norm": D_VNORM,
                 "N": "ucp:N"},
    ucp.c_sfuc_scaled: {"d": "ucp:d", "delta": "ucp:delta", "b": "ucp:b", "v_norm": D_VNORM,
                        "G": "ucp:G", "t": "ucp:t", "N": "ucp:N"},
    ucp.c_sfuc_lower: {"delta": "ucp:delta", "b": "ucp:b", "v_norm": D_VNORM, "M": "ucp:M"},
    ucp.observe: {"cfg": "derived: ucp section", "L": "ucp:L", "delta": "ucp:deltas",
                  "b": "ucp:b"},
    ucp.scan_scale_free: {"cfg": "derived: ucp section", "L_list": "ucp:L",
                          "workers": D_WORKERS},
    ucp.fit_exponent: {"deltas": "fit-exponent:deltas", "values": "derived: observed C_obs",
                       "b": "fit-exponent:b", "v_norm": D_VNORM},
    ucp.lifting_check: {"A": D_RF, "B": "derived: lift V(omega+shift) - V(omega)",
                        "alpha": "lifting:alpha", "mask": "derived: {B >= alpha}",
                        "b": "lifting:b",
                        "N": "derived: formula floor needs a sequence mask; not used for lift masks",
                        "G": "derived: formula floor needs a sequence mask; not used for lift masks",
                        "delta": "derived: formula floor needs a sequence mask; not used for lift masks",
                        "tol": D_DEFAULT, "gap_slack": "lifting:gap_slack",
                        "floor_slack": "lifting:floor_slack"},
    breather.parse_profile: {"text": "conditions:profile",
                             "base_dir": "derived: directory of the config file"},
    breather.dilation_family: {"profile": "conditions:profile", "u_max": "wegner:u_max",
                               "G_u": "wegner:G_u"},
    breather.alloy_family: {"profile": "wegner:profile", "u_max": "wegner:u_max",
                            "G_u": "wegner:G_u", "delone": "wegner:family"},
    breather.assemble_random_potential: {"cfg": D_RF, "omega": "derived: per-trial draw",
                                         "grid": D_GRID},
    breather.check_condition_A: {"family": "conditions:family", "t_grid": "conditions:t_grid",
                                 "delta_grid": "conditions:delta_grid",
                                 "resolution": "conditions:resolution", "d": "conditions:d",
                                 "omega_plus": "conditions:omega_plus",
                                 "sign": "conditions:sign"},
    breather.recheck_witnesses: {"family": "conditions:family",
                                 "report": "derived: condition (A) report",
                                 "factor": "conditions:recheck_factor"},
    breather.classify_profile: {"profile": "conditions:profile", "h_r": "conditions:h_r",
                                "jump_tol": "conditions:jump_tol"},
    breather.check_FG: {"profile": "conditions:profile", "shells": "conditions:shells",
                        "h_r": "conditions:h_r", "g_tol": "conditions:g_tol",
                        "probes_per_shell": "conditions:probes",
                        "g_min_radius": "conditions:g_min_radius"},
    wegner.empirical_trace: {"cfg": D_RF, "grid": D_GRID, "E": "wegner:E", "eps": "wegner:eps",
                             "trials": "wegner:trials", "seed": D_SEED, "workers": D_WORKERS},
    wegner.wegner_bound: {"eps": "wegner:eps", "kappa": "wegner:kappa", "C": "wegner:C",
                          "d": "wegner:d", "L": "wegner:L"},
    wegner.eps_max_standard: {"E0": "wegner:E", "N": "wegner:N"},
    wegner.fit_wegner_exponent: {"eps": "wegner:eps", "means": "derived: trace means",
                                 "d": "wegner:d"},
    wegner.kappa_effective: {
        "alpha1": "derived: family constants", "alpha2": "derived: family constants",
        "beta1": "derived: family constants", "beta2": "derived: family constants",
        "d": "wegner:d", "b": "wegner:b_lift", "K_u": "derived: u_max and G_u",
        "G2": "wegner:G2", "G_u": "wegner:G_u", "delta_eval": "wegner:delta_eval",
        "N": "wegner:N", "M": "wegner:M"},
    wegner.initial_scale: {"cfg": D_RF, "L_list": "initial-scale:L",
                           "trials": "initial-scale:trials", "seed": D_SEED,
                           "m": "initial-scale:m", "bc": "initial-scale:bc",
                           "workers": D_WORKERS},
    wegner.breather_lifting: {"cfg": D_RF, "grid": D_GRID, "b": "lifting:b",
                              "delta": "lifting:shift", "trials": "lifting:trials",
                              "seed": D_SEED, "alpha": "lifting:alpha", "workers": D_WORKERS,
                              "tol": D_DEFAULT, "gap_slack": "lifting:gap_slack",
                              "floor_slack": "lifting:floor_slack"},
    wegner.wegner_study: {"cfg": D_RF, "grid": D_GRID, "E": "wegner:E", "eps": "wegner:eps",
                          "trials": "wegner:trials", "seed": D_SEED, "kappa": "wegner:kappa",
                          "C": "wegner:C", "workers": D_WORKERS},
    heat.kappa_T: {"spec": D_SPEC, "mask": D_MASK, "T": "heat-obs:T", "ridge": "heat-obs:ridge"},
    heat.kappa_bound: {"G": "heat-obs:G", "delta": "heat-obs:delta", "v_norm": D_VNORM,
                       "N": "heat-obs:N", "T": "heat-obs:T"},
    heat.spectral_inequality_check: {"spec": D_SPEC, "mask": D_MASK,
                                     "lam": "derived: truncation threshold",
                                     "G": "heat-obs:G", "delta": "heat-obs:delta",
                                     "N": "heat-obs:N"},
    heat.null_control_check: {"spec": D_SPEC, "mask": D_MASK, "T": "heat-obs:control_T",
                              "a0": "derived: maximizing initial state", "tol": D_DEFAULT},
    heat.heat_study: {"op": D_OP, "mask": D_MASK, "T_grid": "heat-obs:T", "G": "heat-obs:G",
                      "delta": "heat-obs:delta", "N": "heat-obs:N", "workers": D_WORKERS,
                      "tol": D_DEFAULT},
    analysis.extend_reflect: {"values": "derived: eigenfunction or potential",
                              "grid": D_GRID, "R": "ghost:R", "kind": D_DEFAULT},
    analysis.ghost_sandwich_check: {"spec": D_SPEC, "alphas": "ghost:vectors", "T": "ghost:T",
                                    "v_norm": D_VNORM, "h_t": "ghost:h_t",
                                    "slack": "ghost:slack"},
    analysis.ghost_pde_residual: {"grid": "ghost:refine", "phis": D_SPEC, "E": D_SPEC,
                                  "potential": "ghost:potential",
                                  "alphas": "derived: unit coefficients", "T": "ghost:T",
                                  "h_t": "derived: equal to the grid spacing"},
    analysis.ghost_derivative_error: {"spec": D_SPEC, "alphas": "derived: unit coefficients",
                                      "h_t": "derived: equal to the grid spacing"},
    analysis.check_psi_condition: {"r": "weights:r", "sample_count": "weights:samples",
                                   "seed": D_SEED, "d": "weights:d"},
    analysis.bounds_check: {"rho": "weights:rho", "sample_count": "weights:bound_samples",
                            "seed": D_SEED, "d": "weights:d"},
    analysis.hyperbola_distance: {"delta": "weights:hyperbola_deltas",
                                  "resolution": "weights:resolution", "starts": "weights:starts"},
}
