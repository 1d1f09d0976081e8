"""Tests for BriefExtract."""
