"""D2TCP/DCTCP congestion control as a two-state piecewise-smooth map."""

from dctcpmap.core_map import (
    LinkParams,
    MapState,
    SenderParams,
    StepRecord,
    bandwidth_delay_product,
    border,
    iterate_batch,
    mark,
    orbit,
    queue_next,
    red_step,
    step,
)
from dctcpmap.red_policy import RedParams, RedState, ewma_update, red_probability, threshold_policy
from dctcpmap.scenario import Scenario, ScenarioError, load_scenario

__version__ = "0.1.0"
