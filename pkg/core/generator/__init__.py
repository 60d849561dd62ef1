from .layout import *
from .noise import *
from .shots import *
from .ansatz import *
