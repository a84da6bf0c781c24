from .variables import *
