"""Shared set-up for storage runs."""
import math

from crow_eit.dynamics import RampSchedule, make_gaussian_pulse, run_storage_protocol
from crow_eit.model import KGrid, ModelParams


def storage_run(t_ramp, hold_value=0.1, gamma_c=0.0, n_modes=64, width_k=0.1):
    p = ModelParams(J=-1.0, g1=1.0, g2=10.0, gamma_c=gamma_c)
    schedule = RampSchedule(start_value=10.0, hold_value=hold_value, end_value=10.0,
                            t_ramp_down=t_ramp, t_hold=50.0, t_ramp_up=t_ramp)
    grid = KGrid(n_modes, 1.0)
    pulse = make_gaussian_pulse(grid, math.pi / 2, width_k, 2, schedule.initial_params(p))
    return p, schedule, pulse, run_storage_protocol(pulse, p, schedule, 5.0)
