from .optimizer import *
from .loop import *
