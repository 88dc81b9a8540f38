"""HTTP routers, one per service module"""
