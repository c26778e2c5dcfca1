# flake8: noqa

from .encodings import *
from .datasets import *
from .synthetic import *
from .images import *
