"""Protocol workbench for a stratified mix network: BACAP, Sphinx, Pigeonhole and a traffic simulator."""

__version__ = '0.4.0'
