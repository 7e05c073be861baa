"""zombihub: a control hub and wire protocol for fleets of obsolete,
browser-bearing devices — static surface delivery, websocket routing,
shared musical state, and an OSC bridge."""

__version__ = "0.1.0"
