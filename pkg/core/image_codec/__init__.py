from .encodings import *
from .files import *
from .morton import *
from .transforms import *
