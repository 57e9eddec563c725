"""Line-of-sight optical wireless AP planning on simple-polygon floor plans."""

__version__ = "0.1.0"

from .errors import (DisconnectedAreaError, DomainError, InternalInvariantError, OwplanError,  # noqa: E402
                     PlannerError, ValidationError)
from .geometry import (GeomConfig, Layout, Point, Region, connection_region, region_boolean,  # noqa: E402
                       segment_inside, visibility_area_point, visibility_polygon)
from .partition import Partition, Triangle, default_R, hyper_triangulate, triangulate  # noqa: E402
from .pvgraph import PVGraph, build_pv_graph, clique_visibility, visibility_area_polygon  # noqa: E402
from .planner_mcc import Clique, CoverageReport, Deployment, mcc, place_aps, plan_mcc, verify_coverage  # noqa: E402
from .planner_ctc import (ConnectivityReport, ConnectivityTree, ctc, deploy_from_tree, pda_update,  # noqa: E402
                          plan_ctc, verify_backhaul)
from .bounds import (ConnectivityCertificate, HiddenSetCertificate, find_hidden_points, lower_bound,  # noqa: E402
                     max_independent_set, verify_connectivity_certificate, verify_hidden_set)
from .baselines import HexSearchConfig, hex_deploy, hexplus_deploy  # noqa: E402
from .channel import (ChannelParams, Metrics, PowerScheme, channel_gain, data_rate, illumination,  # noqa: E402
                      received_strength, simulate)
from .layoutgen import LayoutGenConfig, gen_layout  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
