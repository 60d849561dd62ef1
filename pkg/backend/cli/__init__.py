from .routers import *
from .app import *
