# bandkit/main.py

from fastapi import FastAPI

from bandkit.routers.bands_routes import router as bands_router
from bandkit.routers.scenes_routes import router as scenes_router

app = FastAPI(title="bandkit")

# Mount routers
app.include_router(bands_router)
app.include_router(scenes_router)


@app.get("/health")
def health_check():
    return {"status": "ok"}
