# flake8: noqa

from .dense import *
from .io import *
