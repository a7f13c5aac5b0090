"""Python interface to the plane-wave coefficient-inverse-problem laboratory."""

try:
    from . import _pwcip as _impl  # wheel layout: extension inside the package
except ImportError:
    import _pwcip as _impl  # development layout: extension on PYTHONPATH

ExperimentConfig = _impl.ExperimentConfig
GridSpec = _impl.GridSpec
MediumSpec = _impl.MediumSpec
PwcipError = _impl.PwcipError
amplitude_field = _impl.amplitude_field
amplitude_floor = _impl.amplitude_floor
carleman_weight = _impl.carleman_weight
eval_grad_n = _impl.eval_grad_n
eval_n = _impl.eval_n
load_config = _impl.load_config
read_field_dump = _impl.read_field_dump
run_invert = _impl.run_invert
run_sweep = _impl.run_sweep
trace_geodesic = _impl.trace_geodesic
travel_time_field = _impl.travel_time_field
validate_medium = _impl.validate_medium
verify_carleman = _impl.verify_carleman

__all__ = [
    "ExperimentConfig",
    "GridSpec",
    "MediumSpec",
    "PwcipError",
    "amplitude_field",
    "amplitude_floor",
    "carleman_weight",
    "eval_grad_n",
    "eval_n",
    "load_config",
    "read_field_dump",
    "run_invert",
    "run_sweep",
    "trace_geodesic",
    "travel_time_field",
    "validate_medium",
    "verify_carleman",
]
