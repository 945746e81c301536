"""Budget-aware POMCP planning for adaptive sampling."""
