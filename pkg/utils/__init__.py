# utils: logging, the concurrent corpus runner and report rendering
