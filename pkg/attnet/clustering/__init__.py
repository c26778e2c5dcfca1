# flake8: noqa

from .admm import *
from .spectral import *
from .metrics import *
from .trials import *
