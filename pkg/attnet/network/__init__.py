# flake8: noqa

from .topology import *
from .factors import *
from .contraction import *
from .io import *
