from timeloc.config import ExperimentConfig, resolve_config
from timeloc.context import RunContext
from timeloc.models import *
from timeloc.utils import CODE_VERSION as __version__
