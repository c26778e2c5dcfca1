# flake8: noqa

from .config import *
from .als import *
from .attn import *
from .base import *
from .baselines import *
