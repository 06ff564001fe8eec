from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("qsensor-fusion")
except PackageNotFoundError:
    __version__ = "0.1.0"
