from .mmd import *
from .selection import *
from .entropy import *
from .gradients import *
from .pca import *
