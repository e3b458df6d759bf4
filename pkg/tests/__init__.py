"""cvk tests"""
