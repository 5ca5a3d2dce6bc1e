"""levyarea - Areas between a spectrally-positive Levy process with secondary jump inputs and its reflection"""
__version__ = "0.1.0"
