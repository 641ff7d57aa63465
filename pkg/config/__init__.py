# Config package
from config.settings import RuntimeSettings, SimConfig, SimPresets, runtime

__all__ = ['RuntimeSettings', 'SimConfig', 'SimPresets', 'runtime']
