#!/usr/bin/env python3
"""
Standalone script to run the SUVR command line.
"""

if __name__ == "__main__":
    from suvr_engine.cli import main

    main()
