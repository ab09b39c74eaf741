"""
Configuration settings for the level set laboratory
Defaults for every stage of the pipeline and the scenario file schema
"""

# Grid storage
FIELD_CONFIG = {
    'dimensions': (2, 3),
    'min_cells_per_axis': 8,
    'spacing_rtol': 1e-9,           # relative mismatch allowed between per-axis spacings
    'interpolation_margin': 1.0,    # cells kept clear of the box for value queries
    'derivative_margin': 1.5,       # cells kept clear for interpolated derivatives
}

# Level set evolution
EVOLVE_DEFAULTS = {
    'cfl_factor': 0.2,              # dt = cfl_factor * h^2 / n
    'cfl_limit': 0.25,              # explicit Euler stability bound, same units
    'eps_reg': 1e-6,                # multiple of h in sqrt(|grad phi|^2 + (eps h)^2)
    'reinit_every': 5,              # steps
    'crossing_order': 1,
    'coverage_threshold': 0.99,
    'reinit_tolerance': 1e-3,       # multiple of h
    'reinit_max_rounds': 50,
    'reinit_band': 3,               # cells around the interface refined by closest points, 0 = off
    'reinit_iterations': 10,        # closest point Newton iterations
    'mean_convex_tolerance': 0.5,   # 1/length; flat faces sample H close to 0
}

# Level surfaces and geometry
SURFACE_CONFIG = {
    'grad_floor_factor': 10.0,      # grad_floor = factor * h
    'tangent_step_factor': 1.0,     # tangent offsets delta = factor * sqrt(h / H) for grad H and Laplacian H
    'projection_iterations': 4,
    'gaussian_cutoff': 8.0,         # truncate at |x - p| > cutoff * sqrt(Lambda)
}

ENTROPY_SEARCH_DEFAULTS = {
    'center_points': 5,             # per axis on the dilated bounding box
    'scale_points': 40,
    'dilation': 1.5,
    'refine_seeds': 3,
    'xatol': 1e-5,
    'fatol': 1e-9,
    'max_iterations': 400,
}

# Singular point analysis
SINGULAR_CONFIG = {
    'null_tol_factor': 0.15,        # null_tol = factor / (n - 1)
    'shape_tol': 0.15,              # relative, against -1/(n - k - 1)
    'sign_radius_factor': 5.0,      # local shape sphere radius in cells
    'sign_directions': {2: 32, 3: 96},
    'dedupe_factor': 2.0,
    'cluster_factor': 4.0,
    'u_floor_factor': 0.05,         # lower bound of u_floor, factor * h^2
    'sign_tol_factor': 0.25,        # local shape test ignores |u - u(p)| below factor * h^2
    'stability_factor': 1.3,
    'divergence_factor': 1.5,
    'min_samples': 10,
    'lojasiewicz_r0_factor': 32.0,  # cells
    'lojasiewicz_levels': 4,
    'cone_angle': 0.3,              # phi, radians
    'closeness_eps': 0.05,
    'clearing_M': 3.0,
    'scale_r_max_factor': 32.0,     # cells
    'scale_min_factor': 4.0,        # cells
    'modulus_radii_factors': (16.0, 8.0, 4.0),
    'modulus_max_samples': 200,
    'slice_radius_factor': 8.0,
    'hessian_stencil': 'fit',       # fd | fit
    'hessian_fit_cells': 4,         # half width of the quadratic fit block
    'u_floor_noise_factor': 3.0,    # calibrated u_floor = factor * arrival time noise
}

# Flowline tracing
FLOWLINE_CONFIG = {
    'step_factor': 0.5,             # step = factor * h
    'max_len_factor': 2.0,          # max_len = factor * box diagonal
    'slowdown_factor': 5.0,         # shrink steps once |grad u| < factor * grad_floor
    'max_halvings': 12,
    'cone_inflation_deg': 5.0,
    'arc_slack_rtol': 0.01,
}

# Scenario acceptance thresholds
ACCEPTANCE_CONFIG = {
    'round_hessian_tol': 0.05,      # max entry of Hess u(p) + I / (n - 1)
    'round_center_cells': 2.0,
    'fit_rms_cells': 2.0,
    'fit_angle_deg': 10.0,
    'modulus_radius_cells': 8.0,
    'modulus_tol': 0.15,
    'monotone_violation_rate': 1e-3,  # re-entered cells per inside cell
    'huisken_slack': 0.02,
    'huisken_offsets': 6,
    'flowline_start_cells': 12.0,
    'flowline_end_cells': 4.0,      # arc bounds apply to lines ending this close to p
    'entropy_levels': (0.1, 0.5),   # fractions of the extinction time
}

BUILTIN_SCENARIOS = ['sphere2d', 'cylinder3d', 'torus3d', 'dumbbell3d']

# Scenario file schema: key -> (type, default, constraint, unit comment)
SCENARIO_SCHEMA = {
    'scenario.name': ('str', '', None, ''),
    'shape.kind': ('str', 'sphere', ('sphere', 'cylinder', 'torus', 'dumbbell'), ''),
    'shape.center': ('floats', None, None, 'length'),
    'shape.radius': ('float', 0.8, 'positive', 'length'),
    'shape.axis': ('int', 2, 'nonnegative', 'index'),
    'shape.half_length': ('float', 0.0, 'nonnegative', 'length, 0 = infinite'),
    'shape.major_radius': ('float', 1.0, 'positive', 'length'),
    'shape.minor_radius': ('float', 0.35, 'positive', 'length'),
    'shape.bulb_separation': ('float', 0.69, 'positive', 'length, center to mid-plane'),
    'shape.bulb_radius': ('float', 0.37, 'positive', 'length'),
    'shape.neck_radius': ('float', 0.12, 'positive', 'length'),
    'grid.lower': ('floats', None, None, 'length'),
    'grid.upper': ('floats', None, None, 'length'),
    'grid.cells': ('ints', None, None, 'count per axis'),
    'evolve.dt': ('float', None, 'positive', 'time, unset = 0.2 h^2 / n'),
    'evolve.eps_reg': ('float', EVOLVE_DEFAULTS['eps_reg'], 'positive', 'multiple of h'),
    'evolve.reinit_every': ('int', EVOLVE_DEFAULTS['reinit_every'], 'positive', 'steps'),
    'evolve.t_max': ('float', None, 'positive', 'time, unset = enclosing-ball extinction'),
    'evolve.mean_convex_tolerance': ('float', EVOLVE_DEFAULTS['mean_convex_tolerance'], 'nonnegative', '1/length'),
    'analysis.classification': ('bool', True, None, ''),
    'analysis.lojasiewicz': ('bool', True, None, ''),
    'analysis.clearing_out': ('bool', True, None, ''),
    'analysis.flowlines': ('bool', True, None, ''),
    'analysis.entropy': ('bool', False, None, ''),
    'analysis.cylindrical_scale': ('bool', False, None, ''),
    'analysis.hessian_modulus': ('bool', True, None, ''),
    'analysis.phi': ('float', SINGULAR_CONFIG['cone_angle'], 'positive', 'radians'),
    'analysis.eps': ('float', SINGULAR_CONFIG['closeness_eps'], 'positive', 'dimensionless'),
    'analysis.u_floor': ('float', None, 'positive', 'time, unset = calibrated from the residual'),
    'analysis.clearing_M': ('float', SINGULAR_CONFIG['clearing_M'], 'positive', 'dimensionless'),
    'analysis.clearing_offsets': ('floats', None, None, 'time'),
    'analysis.hessian_stencil': ('str', SINGULAR_CONFIG['hessian_stencil'], ('fd', 'fit'), ''),
    'output.directory': ('str', 'output', None, 'path'),
    'output.emit_every': ('int', 0, 'nonnegative', 'steps, 0 = final only'),
    'output.vtk': ('bool', True, None, ''),
    'output.plots': ('bool', False, None, ''),
    'expect.classification': ('str', 'none', None, 'Round | Cylindrical(k) | Saddle | none'),
    'expect.verdict': ('str', 'none', ('TypeI', 'TypeII', 'none'), ''),
    'expect.reference': ('str', 'none', ('sphere', 'cylinder', 'none'), ''),
    'expect.linf_radius': ('float', 0.0, 'nonnegative', 'length'),
    'expect.linf_tolerance': ('float', 0.01, 'positive', 'time'),
}

ENV_PREFIX = 'LEVELSET_'
