"""Services package initialization."""
from .crane_kinematics import forward_kinematics, jacobian_point, cylinder_length, joint_angle_from_length
from .load_dynamics import joint_torques, static_reaction_force, cylinder_reaction_forces, total_force
from .flow_model import classify_direction, meter_in_flow, sg_derivative
from .gaussian_process import GPModel, fit_gp, gp_predict, log_marginal_likelihood
from .features import featurize, geometry_hash
from .pressure_models import (
    WorkingPressureModel,
    build_training_set,
    train_working_pressure,
    predict_working_pressure,
    pump_demand,
    pump_pressure,
    fit_pump_margins
)
from .synthetic_plant import default_plant, simulate_trajectory, experiment_suite
from .config_loader import load_config, load_schedule
from .data_io import read_log, write_log, write_feature_table, save_bundle, load_bundle, check_geometry

__all__ = [
    'forward_kinematics',
    'jacobian_point',
    'cylinder_length',
    'joint_angle_from_length',
    'joint_torques',
    'static_reaction_force',
    'cylinder_reaction_forces',
    'total_force',
    'classify_direction',
    'meter_in_flow',
    'sg_derivative',
    'GPModel',
    'fit_gp',
    'gp_predict',
    'log_marginal_likelihood',
    'featurize',
    'geometry_hash',
    'WorkingPressureModel',
    'build_training_set',
    'train_working_pressure',
    'predict_working_pressure',
    'pump_demand',
    'pump_pressure',
    'fit_pump_margins',
    'default_plant',
    'simulate_trajectory',
    'experiment_suite',
    'load_config',
    'load_schedule',
    'read_log',
    'write_log',
    'write_feature_table',
    'save_bundle',
    'load_bundle',
    'check_geometry'
]
