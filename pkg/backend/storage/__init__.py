from .schema import *
from .connection import *
from .utils import *
from .datasets import *
